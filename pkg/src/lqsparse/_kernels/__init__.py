"""Kernel backend selection: compiled extension when available, numpy fallback.

Both backends expose the same primitive set (matrix-vector product,
elementwise combinations, shrinkage maps, step norms). Every solver path goes
through these primitives, so results are reproducible within a backend by
construction. The compiled backend calls the same BLAS as numpy for products
and dot products; its elementwise loops use libm directly, so the two
backends agree to ~1e-12 relative rather than bit-for-bit.

Selection is automatic at import (compiled if built). The environment
variable LQSPARSE_BACKEND forces it: "python" (reference), "c" (compiled,
error if missing), or "auto" (default).
"""

from __future__ import annotations

import os

import numpy as np

from . import _ref

__all__ = [
    "backend_name",
    "scaled_adjoint",
    "mat_vec",
    "sub",
    "add2",
    "add3",
    "extrapolate",
    "scale",
    "scale_sum",
    "soft_shrink",
    "soft_shrink_vec",
    "qista_shrink",
    "diff_norm",
]

_choice = os.environ.get("LQSPARSE_BACKEND", "auto").lower()
if _choice not in ("auto", "python", "c"):
    raise ImportError(
        f"LQSPARSE_BACKEND must be 'auto', 'python', or 'c'; got {_choice!r}"
    )

_impl = _ref
if _choice in ("auto", "c"):
    try:
        from . import _accel as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "c":
            raise ImportError(
                "LQSPARSE_BACKEND=c but the compiled kernels are not built"
            ) from None
        _impl = _ref

mat_vec = _impl.mat_vec
sub = _impl.sub
add2 = _impl.add2
add3 = _impl.add3
extrapolate = _impl.extrapolate
scale = _impl.scale
scale_sum = _impl.scale_sum
soft_shrink = _impl.soft_shrink
soft_shrink_vec = _impl.soft_shrink_vec
qista_shrink = _impl.qista_shrink
diff_norm = _impl.diff_norm


def backend_name() -> str:
    """Name of the active kernel backend: "python" or "c"."""
    return _impl.BACKEND


def scaled_adjoint(a, beta: float) -> np.ndarray:
    """G = β·Aᵀ as a fresh C-contiguous array.

    Shared by every solver and by default-filled unfolded layers, so the
    scaled adjoint is bitwise identical wherever it appears (elementwise
    scalar multiplication does not depend on memory order).
    """
    return np.ascontiguousarray(beta * np.asarray(a, dtype=float).T)
