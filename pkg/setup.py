import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "apml.kernels._compiled",
        sources=["src/apml/kernels/_compiled.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        # a failed build is not fatal; the NumPy fallback is used instead
        optional=True,
    ),
]

setup(ext_modules=cythonize(extensions, language_level="3"))
