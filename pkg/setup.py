"""Build script: compiles the optional accelerated kernels.

The compiled extension is a pure speedup — if Cython or a C toolchain is
missing (or LQSPARSE_PURE_PYTHON is set), the build falls back to the
reference numpy kernels with a warning instead of failing.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that degrades to the pure-python backend on any failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing entirely
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # compiler present but the build failed
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            f"warning: accelerated kernels not built ({exc!r}); "
            "falling back to the pure-python backend",
            file=sys.stderr,
        )


def extensions():
    if os.environ.get("LQSPARSE_PURE_PYTHON"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython unavailable; building without accelerated kernels",
            file=sys.stderr,
        )
        return []
    ext = Extension(
        "lqsparse._kernels._accel",
        sources=["src/lqsparse/_kernels/_accel.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


setup(cmdclass={"build_ext": OptionalBuildExt}, ext_modules=extensions())
