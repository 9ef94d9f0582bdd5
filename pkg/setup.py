"""Build script: compiles the optional speed kernels, falling back to pure Python."""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; a failure is not fatal.

    The package selects a pure-Python kernel backend at import time when the
    compiled module is absent, so an environment without a C compiler still
    gets a working (slower) installation.
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - deliberate catch-all
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building the compiled kernels failed ({exc}); "
            "installing with the pure-Python backend only",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython unavailable; installing with the pure-Python "
            "backend only",
            file=sys.stderr,
        )
        return []
    # -ffp-contract=off keeps floating-point evaluation order identical to
    # the pure-Python backend so both produce bit-equal chains per seed.
    ext = Extension(
        "netpanel._kernels._speed",
        sources=["src/netpanel/_kernels/_speed.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
