from setuptools import setup, Extension

import numpy as np

# The compiled event kernel is optional: the package falls back to the pure
# Python implementation in asepblocks._pykernel when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "asepblocks._speedups",
                ["src/asepblocks/_speedups.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-march=native"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
