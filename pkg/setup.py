"""Build script for the optional compiled search kernel.

The package works without the extension (a pure-Python fallback is selected
at import time); building it just makes the exhaustive-search oracle fast.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Degrade to the pure-Python fallback if no compiler is available."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernel not built ({exc}); "
                  "falling back to pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "falling back to pure Python")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("lpalloc._kernels._core",
                   ["src/lpalloc/_kernels/_core.pyx"],
                   # no fp contraction: the compiled kernel must stay
                   # arithmetically in lockstep with the pure fallback
                   extra_compile_args=["-O3", "-ffp-contract=off"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
