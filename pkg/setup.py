"""Build the optional Cython jet kernel.

The package works without it: ``sasakimc.expr`` falls back to the pure-Python
kernel when the extension is missing.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sasakimc.expr._kernel",
                ["src/sasakimc/expr/_kernel.pyx"],
                include_dirs=[np.get_include()],
                # no FMA contraction: keeps results bitwise equal to the Python kernel
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
