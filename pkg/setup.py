"""Builds the optional compiled ray-cast kernel.

The package works without it (a numpy fallback is selected at import time),
so a failed extension build is not fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/atticsim/kernels/_raycast.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [np.get_include()]
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"skipping compiled kernel ({exc}); numpy fallback will be used")
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
