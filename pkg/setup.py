"""Build script: compiles the simplex hot kernel when Cython is available.

The package works without the extension (a pure-numpy kernel is selected at
import time), so any build failure here is non-fatal.  Set POCBOUNDS_NO_EXT=1
to skip the compiled kernel on purpose.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("POCBOUNDS_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "pocbounds._simplex._core",
                    ["src/pocbounds/_simplex/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
