"""Componentwise thresholding operators and the generalized proximal operator.

All operators are pure functions. The scalar soft-threshold map is the
proximal operator of a weighted ℓ1 penalty; the adaptive rule re-derives its
per-component threshold from the current point's magnitudes so that large
components are shrunk less than small ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import InvalidInputError

__all__ = [
    "ThresholdRule",
    "soft_threshold",
    "qista_threshold",
    "adaptive_threshold_values",
    "hard_threshold_keep_k",
    "generalized_prox",
]


@dataclass(frozen=True, eq=False)
class ThresholdRule:
    """A named thresholding rule: soft-constant, qista-adaptive, or hard-keep-k.

    Exactly the fields for ``kind`` are consulted: ``theta`` for
    "soft-constant"; ``lam``, ``q``, ``eps`` for "qista-adaptive"; ``k`` for
    "hard-keep-k".
    """

    kind: str
    theta: float | np.ndarray | None = None
    lam: float | None = None
    q: float | None = None
    eps: float | np.ndarray | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("soft-constant", "qista-adaptive", "hard-keep-k"):
            raise InvalidInputError(f"unknown threshold rule kind {self.kind!r}")
        if self.kind == "soft-constant":
            if self.theta is None or np.any(np.asarray(self.theta) < 0):
                raise InvalidInputError("soft-constant rule needs theta >= 0")
        elif self.kind == "qista-adaptive":
            if self.lam is None or self.lam < 0:
                raise InvalidInputError("qista-adaptive rule needs lam >= 0")
            if self.q is None or not (0.0 < self.q <= 1.0):
                raise InvalidInputError("qista-adaptive rule needs q in (0, 1]")
            if self.eps is None or np.any(np.asarray(self.eps) <= 0):
                raise InvalidInputError("qista-adaptive rule needs eps > 0")
        else:
            if self.k is None or self.k < 0:
                raise InvalidInputError("hard-keep-k rule needs k >= 0")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "soft-constant":
            return soft_threshold(x, self.theta)
        if self.kind == "qista-adaptive":
            return qista_threshold(x, self.lam, self.eps, self.q)
        return hard_threshold_keep_k(x, self.k)


def soft_threshold(x, theta):
    """Componentwise sign(xᵢ)·max(0, |xᵢ|−θᵢ); θ scalar or per-component.

    This is the exact proximal operator of z ↦ Σθᵢ|zᵢ|.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.asarray(theta) < 0):
        raise InvalidInputError("threshold must be nonnegative")
    scalar_in = x.ndim == 0
    xv = np.atleast_1d(x)
    if np.isscalar(theta) or np.asarray(theta).ndim == 0:
        out = _kernels.soft_shrink(xv, float(theta))
    else:
        th = np.asarray(theta, dtype=float)
        if th.shape != xv.shape:
            raise InvalidInputError(
                f"threshold shape {th.shape} does not match input {xv.shape}"
            )
        out = _kernels.soft_shrink_vec(xv, th)
    return float(out[0]) if scalar_in else out


def adaptive_threshold_values(r, lam: float, eps, q: float) -> np.ndarray:
    """The per-component adaptive threshold θᵢ = λ/(|rᵢ|+εᵢ)^(1−q)."""
    r = np.asarray(r, dtype=float)
    eps = _eps_vector(eps, r.shape[0])
    _check_adaptive(lam, q)
    return lam / (np.abs(r) + eps) ** (1.0 - q)


def qista_threshold(r, lam: float, eps, q: float) -> np.ndarray:
    """Soft-threshold r with the adaptive threshold λ/(|rᵢ|+εᵢ)^(1−q).

    Components currently large in magnitude receive a small threshold (they
    are trusted and barely shrunk); small components receive a large one.
    λ=0 is the identity map.
    """
    r = np.asarray(r, dtype=float)
    eps = _eps_vector(eps, r.shape[0])
    _check_adaptive(lam, q)
    return _kernels.qista_shrink(r, float(lam), eps, float(q))


def _check_adaptive(lam: float, q: float):
    if lam < 0:
        raise InvalidInputError(f"need lam >= 0, got {lam}")
    if not (0.0 < q <= 1.0):
        raise InvalidInputError(f"need q in (0, 1], got {q}")


def _eps_vector(eps, n: int) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.ndim == 0:
        eps = np.full(n, float(eps))
    if eps.shape != (n,):
        raise InvalidInputError(f"eps shape {eps.shape} does not match n={n}")
    if not np.all(eps > 0):
        raise InvalidInputError("eps must be strictly positive componentwise")
    return eps


def hard_threshold_keep_k(x, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries, zero the rest.

    Ties are broken by keeping the lowest index, making the operator (and any
    solver built on it) fully deterministic.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not (0 <= k <= n):
        raise InvalidInputError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == n:
        return x.copy()
    out = np.zeros_like(x)
    if k == 0:
        return out
    # stable sort on negated magnitudes → lowest index wins ties
    keep = np.argsort(-np.abs(x), kind="stable")[:k]
    out[keep] = x[keep]
    return out


def generalized_prox(r, psi, b, w, gamma: float):
    """Exact proximal point of f(z) = Σᵢ wᵢ|(ψz+b)ᵢ| at r, for ψψᵀ = γ·I.

    Validates the hypothesis ψψᵀ = γ·I (max-abs deviation ≤ 1e-8) rather than
    trusting it — the closed form below is false without it — then returns

        r + (1/γ)·ψᵀ( soft_threshold(ψr+b; γw) − (ψr+b) ).
    """
    r = np.asarray(r, dtype=float)
    psi = np.asarray(psi, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    if gamma <= 0:
        raise InvalidInputError(f"need gamma > 0, got {gamma}")
    if np.any(w < 0):
        raise InvalidInputError("weights must be nonnegative")
    big_n = psi.shape[0]
    if psi.ndim != 2 or psi.shape[1] != r.shape[0]:
        raise InvalidInputError(
            f"psi shape {psi.shape} does not match input length {r.shape[0]}"
        )
    if b.shape != (big_n,) or w.shape not in ((big_n,), ()):
        raise InvalidInputError("b and w must have one entry per row of psi")
    dev = float(np.max(np.abs(psi @ psi.T - gamma * np.eye(big_n))))
    if dev > 1e-8:
        raise InvalidInputError(
            f"psi·psiᵀ deviates from gamma·I by {dev:.3e} (> 1e-8); "
            "the closed-form proximal identity does not apply"
        )
    u = psi @ r + b
    shrunk = soft_threshold(u, gamma * w)
    return r + (psi.T @ (shrunk - u)) / gamma
