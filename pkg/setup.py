import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled classifier's arithmetic close to the
# pure-Python twin (no fused multiply-adds changing the last bits of brackets).
setup(ext_modules=cythonize(
    [
        Extension(
            "cqnls._shootfast",
            ["src/cqnls/_shootfast.pyx"],
            extra_compile_args=["-O2", "-ffp-contract=off"],
            include_dirs=[numpy.get_include()],
        )
    ],
    language_level=3,
))
