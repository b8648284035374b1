"""Build script: compiles the optional fast kernels, falls back to pure Python.

The package works without the extension; `roundlab.kernels` picks whichever
backend imported successfully.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/roundlab/_ckernels.pyx"],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
