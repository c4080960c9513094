import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and os.environ.get("INBUILDING_RT_PURE", "") in ("", "0"):
    extensions = cythonize(
        [
            Extension(
                "inbuilding_rt._kernels._grid_c",
                ["src/inbuilding_rt/_kernels/_grid_c.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
