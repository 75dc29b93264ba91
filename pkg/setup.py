"""Build script for the optional compiled DSP core.

The package is fully functional without the extension: nels.kernels falls
back to the NumPy implementations when nels._accel is not importable.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "nels._accel",
                ["src/nels/_accel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
else:
    extensions = []

setup(ext_modules=extensions)
