"""Build script for the compiled combining kernel.

The package works without the extension (a pure NumPy fallback is selected
at import time); building it just makes allocation searches much faster.
"""

from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "uesa._kernels._fastcomb",
        ["src/uesa/_kernels/_fastcomb.pyx"],
        extra_compile_args=["-O3", "-fcx-limited-range"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
