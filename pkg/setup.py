import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "canonstyle._kernels._compose",
        ["src/canonstyle/_kernels/_compose.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    ),
    Extension(
        "canonstyle._kernels._field",
        ["src/canonstyle/_kernels/_field.pyx"],
        include_dirs=[np.get_include()],
        # fast-math lets gcc vectorize the sin/cos/exp loops through libmvec
        extra_compile_args=["-O3", "-ffast-math", "-march=native"],
        extra_link_args=["-lmvec"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    ),
]

setup(ext_modules=cythonize(extensions, language_level=3))
