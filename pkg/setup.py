"""Build script: compiles the optional C extension for the hot kernels.

The package works without the extension (a pure-Python fallback is
selected at import time), so compilation failures are non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "revhist._kernels._speedups",
                ["src/revhist/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
