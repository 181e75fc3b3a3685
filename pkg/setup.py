from setuptools import Extension, setup

# The compiled kernels are an optimization, not a requirement: if Cython or a
# C toolchain is unavailable the package installs pure-Python and selects the
# numpy fallback at import time.
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    extensions = []
else:
    extensions = cythonize(
        [
            Extension(
                "sscusum._speedups",
                ["src/sscusum/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=extensions)
