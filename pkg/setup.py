"""Build script for the compiled proximal-gradient kernel.

The extension is optional: set SIMPLEXSC_PURE_PYTHON=1 to skip compilation,
in which case the package falls back to the numpy kernel at import time.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("SIMPLEXSC_PURE_PYTHON"):
        return []
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "simplexsc._pgd_core",
        ["src/simplexsc/_pgd_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )


setup(ext_modules=extensions())
