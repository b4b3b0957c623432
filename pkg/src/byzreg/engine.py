"""Selects the simulation core at import time.

The hot module ``byzreg._engine`` is plain Python that Cython can compile
unchanged into ``byzreg._engine_opt`` (see setup.py).  The compiled twin is
preferred when present; set BYZREG_PURE=1 to force the interpreted one,
e.g. for the benchmark.  Both are built from the same source file, so they
cannot diverge behaviorally.
"""

import os

if os.environ.get("BYZREG_PURE"):
    from byzreg import _engine as impl

    ENGINE = "pure"
else:
    try:
        from byzreg import _engine_opt as impl  # type: ignore[attr-defined]

        if impl.__file__ and impl.__file__.endswith(".py"):
            # a stray source copy left over from a build is not the extension
            raise ImportError("twin source found instead of the extension")
        ENGINE = "compiled"
    except ImportError:
        from byzreg import _engine as impl

        ENGINE = "pure"
