"""Build script for the compiled kernel extension.

The extension is optional: if the build fails (no compiler, no Cython),
the package installs anyway and falls back to the pure-NumPy kernels in
``tfloc._kernels_py``.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "tfloc._native",
                ["src/tfloc/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
