"""Build script for the optional compiled max-sum kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); building it just makes headless benchmark runs faster.
-ffp-contract=off keeps the C arithmetic bit-identical to CPython floats so
both kernels produce the same messages.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "sarswarm.allocation._kernel_cy",
                sources=["src/sarswarm/allocation/_kernel_cy.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
