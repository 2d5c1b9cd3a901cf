"""Build script: compiles the optional Cython kernel extension.

If Cython or a C compiler is unavailable the install proceeds without the
extension and the package falls back to the pure-NumPy kernels at import.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as err:
        warnings.warn(f"building without compiled kernels: {err}")
        return []
    return cythonize(
        [
            Extension(
                "drivelab.kernels._native",
                ["src/drivelab/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )


class optional_build_ext(build_ext):
    """Treat extension build failures as non-fatal."""

    def run(self):
        try:
            super().run()
        except Exception as err:  # compiler missing, header issues, ...
            warnings.warn(f"compiled kernels skipped: {err}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as err:
            warnings.warn(f"compiled kernel {ext.name} skipped: {err}")


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
