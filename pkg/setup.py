"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the conv/pool hot loops faster,
especially for single-image gradient work.
"""

from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        return []
    ext = Extension(
        "trojanscan.engine._kernels",
        sources=["src/trojanscan/engine/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-march=native", "-funroll-loops"],
        optional=True,
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
