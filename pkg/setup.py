"""Build script for the optional compiled search kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so the build is marked optional and install
proceeds even if no C compiler is available.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "irsrelay.kernels._search",
        ["src/irsrelay/kernels/_search.pyx"],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(extensions, language_level="3")
else:
    ext_modules = []

for ext in ext_modules:
    ext.optional = True

setup(ext_modules=ext_modules)
