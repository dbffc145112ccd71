"""Kernel backend selection.

``HSI_FORGE_BACKEND`` picks the hot-path implementation:

* ``auto`` (default) — numba if importable, else pure numpy
* ``numba``          — require the jitted kernels
* ``numpy``          — force the pure-numpy fallback

The two backends implement identical contracts (see
``benchmarks/bench_kernels.py`` for a side-by-side timing run).
"""

import os

_CHOICE = os.environ.get("HSI_FORGE_BACKEND", "auto").lower()

if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"HSI_FORGE_BACKEND must be auto|numba|numpy, got {_CHOICE!r}")

if _CHOICE == "numpy":
    from . import _kernels_numpy as kernels
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as kernels
        BACKEND = "numba"
    except ImportError:
        if _CHOICE == "numba":
            raise
        from . import _kernels_numpy as kernels
        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND
