"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python implementation is
selected at import time); building it makes the event-driven simulators
roughly two orders of magnitude faster.  Build in place with

    python setup.py build_ext --inplace
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/fepsim/_ckernels.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
    include_dirs = [numpy.get_include()]
except ImportError:
    ext_modules = []
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
