"""Build the optional compiled kernels; the package works without them."""

import os
import platform
import sys

from setuptools import setup



def _vector_math() -> list[str]:
    # glibc's libmvec backs the SIMD row loops on x86-64 Linux.
    if sys.platform.startswith("linux") and platform.machine() in ("x86_64", "AMD64"):
        return ["mvec", "m"]
    return []


ext_modules = []
if not os.environ.get("WIGNER_NO_EXTENSION"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "wignerlim._kernels",
                    ["src/wignerlim/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fopenmp-simd"],
                    libraries=_vector_math(),
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
