import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RETASA_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "retasa._ckernels",
                    ["src/retasa/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython/NumPy at build time: install the pure-NumPy package only.
        ext_modules = []

setup(ext_modules=ext_modules)
