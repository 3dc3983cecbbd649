"""Build script for the optional compiled kernels.

The package works without a C compiler: when Cython or numpy headers are
missing the extension is skipped and the pure-Python kernels are used.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ADAPTIVE_CP_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "adaptive_cp._ckernels",
                    ["src/adaptive_cp/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
