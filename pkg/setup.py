"""Build script for the optional compiled kernels.

Package metadata lives in pyproject.toml.  When Cython or a compiler is
missing the package still installs and falls back to the numpy kernels.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("IFTRKIT_NO_EXTENSION", "") in ("", "0"):
    try:
        import numpy as np
        import scipy  # noqa: F401  (provides cython_special declarations)
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "iftrkit._kernels",
                    ["src/iftrkit/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
