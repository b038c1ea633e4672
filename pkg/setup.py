"""Build hook: compiles the optional dual-number extension when Cython is present.

The package is fully functional without the extension; geored.dualnum falls
back to the pure-Python kernel at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("geored._dual_cy", ["src/geored/_dual_cy.pyx"])],
        language_level="3",
    )
except Exception:
    extensions = []

setup(ext_modules=extensions)
