import os

import numpy as np
from setuptools import Extension, setup

# RPRETURN_NO_EXT=1 builds the pure-Python package only.
ext_modules = []
if not os.environ.get("RPRETURN_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "rpreturn._kernels",
                    ["src/rpreturn/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: compensated sums and bitwise replay depend on strict IEEE order
                    extra_compile_args=["-O3", "-fno-fast-math", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
