from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("recoverynet._kernels", ["src/recoverynet/_kernels.pyx"]),
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
