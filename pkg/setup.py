"""Build script: compiles the optional Cython kernel extension.

Set BWM_SKIP_EXT=1 to install without the compiled core; the package
falls back to the pure-numpy kernels at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BWM_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "biwave._kernels",
                    ["src/biwave/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
