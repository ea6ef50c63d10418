import os

from setuptools import setup

ext_modules = []
if os.environ.get("ANTCSP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("antcsp._kernel", ["src/antcsp/_kernel.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )
    except ImportError:
        # no Cython: the pure-Python search is used
        ext_modules = []

setup(ext_modules=ext_modules)
