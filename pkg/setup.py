"""Build script for the optional compiled engine.

The package is fully functional without the extension (a numpy fallback
is selected at import); the build therefore tolerates a missing compiler
or Cython instead of failing the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing toolchain: fall back to pure python
            print(f"WARNING: compiled engine skipped ({exc}); using the numpy fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: building {ext.name} failed ({exc}); using the numpy fallback", file=sys.stderr)


extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "grayhilbert._engine_c",
                ["src/grayhilbert/_engine_c.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
