"""Build hook: optionally compile the simulation core with Cython.

``byzreg._engine`` is plain Python; when Cython is available we compile an
identical copy as ``byzreg._engine_opt`` and the package prefers it at
import time (see byzreg/engine.py).  Without Cython, or if the build fails,
the interpreted engine is used and nothing is lost but speed.
"""

import shutil
from pathlib import Path

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    # setuptools requires /-separated paths relative to this file
    src = Path("src") / "byzreg" / "_engine.py"
    twin = src.with_name("_engine_opt.py")
    shutil.copyfile(src, twin)
    ext_modules = cythonize(
        [twin.as_posix()],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
