import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels are an optional speedup; the package falls back to the
# pure-Python implementations in conecal._pykernels when they are absent.
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "conecal._speedups",
                ["src/conecal/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=extensions)
