import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# optional=True lets the build succeed without a compiler; the package then
# runs on the NumPy fallback.
extensions = [
    Extension(
        "rkhsbuild._core",
        ["src/rkhsbuild/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": 3}))
