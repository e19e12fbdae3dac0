"""Build the optional compiled search kernel.

The solver's inner loop lives in ``mapfx/solver/kernel.py``, written in
Cython pure-Python mode: the same file runs interpreted when no compiler
is available and compiles to a C extension when one is.  If compilation
fails for any reason the package still installs and works, just slower.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        ["src/mapfx/solver/kernel.py"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"mapfx: building without compiled kernel ({exc})")
    extensions = []

setup(ext_modules=extensions)
