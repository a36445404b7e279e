"""Kernel backend selection.

The hot kernels (counter-based uniforms, sample-moment accumulation, the
Isserlis pairing sum) ship in two implementations: numba @njit and pure
numpy.  The environment variable GMOMENTS_BACKEND picks one at import time:

    GMOMENTS_BACKEND=numba   force the jitted kernels
    GMOMENTS_BACKEND=numpy   force the pure-numpy fallback
    unset / auto             numba if it imports, else numpy

benchmarks/bench_backends.py compares the two.
"""

from __future__ import annotations

import os

ENV_VAR = "GMOMENTS_BACKEND"


def _select() -> str:
    choice = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
    if choice == "auto":
        try:
            import numba  # noqa: F401
        except ImportError:
            return "numpy"
        return "numba"
    if choice not in ("numba", "numpy"):
        raise ValueError(
            f"{ENV_VAR} must be 'numba', 'numpy' or 'auto', got {choice!r}"
        )
    return choice


BACKEND = _select()

if BACKEND == "numba":
    from . import _kernels_numba as kernels
else:
    from . import _kernels_numpy as kernels  # type: ignore[no-redef]

__all__ = ["BACKEND", "ENV_VAR", "kernels"]
