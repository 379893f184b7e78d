import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LIEADJ_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "lieadj._kernels._core",
                    sources=["src/lieadj/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        # No Cython toolchain: the pure-Python kernels are used instead.
        ext_modules = []

setup(ext_modules=ext_modules)
