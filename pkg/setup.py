import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PORTRAIT_FORGE_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "portrait_forge._kernel._fast",
                    ["src/portrait_forge/_kernel/_fast.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython available: the pure-Python kernel is used at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
