"""Domain types, seeded instance generation, quality metrics, and objectives.

All randomness flows through numpy's PCG64 generator seeded explicitly, so
every generator is bit-reproducible across runs and platforms for a fixed
numpy version. Types are treated as immutable after construction and every
operation here is a pure function of its arguments.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvalidInputError",
    "FormatError",
    "ProblemInstance",
    "SolverConfig",
    "RecoveryReport",
    "IterateTrace",
    "SNR_CAP_DB",
    "spectral_norm",
    "generate_gaussian_matrix",
    "generate_k_sparse_signal",
    "generate_bernoulli_gaussian",
    "add_noise_snr",
    "relative_error",
    "snr_db",
    "objective_lq",
    "objective_approx",
    "functional_h",
    "make_instance",
    "derive_seed",
    "save_instance",
    "load_instance",
]

#: snr_db() returns this cap instead of +inf when the error is exactly zero.
SNR_CAP_DB = 300.0


class InvalidInputError(ValueError):
    """An argument violates an operation's documented precondition."""


class FormatError(ValueError):
    """A serialized file does not match its documented grammar."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One sparse-recovery problem: sensing matrix, measurement, ground truth.

    ``y = a @ x0`` holds exactly (to construction arithmetic) when ``x0`` is
    present and ``noise_snr_db`` is None. ``k`` is the exact support size for
    exact-sparse signals, or the expected support size for Bernoulli-Gaussian
    signals. ``x0`` is None for instances built from raw measurements.
    """

    a: np.ndarray
    y: np.ndarray
    x0: np.ndarray | None
    m: int
    n: int
    k: int
    noise_snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        if not (0 < self.m < self.n):
            raise InvalidInputError(
                f"need 0 < m < n, got m={self.m}, n={self.n}"
            )
        if not (1 <= self.k <= self.n):
            raise InvalidInputError(f"need 1 <= k <= n, got k={self.k}")
        if a.shape != (self.m, self.n):
            raise InvalidInputError(
                f"matrix shape {a.shape} does not match (m, n)=({self.m}, {self.n})"
            )
        if y.shape != (self.m,):
            raise InvalidInputError(
                f"measurement shape {y.shape} does not match m={self.m}"
            )
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(y)):
            raise InvalidInputError("matrix and measurement must be finite")
        if self.x0 is not None:
            x0 = np.asarray(self.x0, dtype=float)
            object.__setattr__(self, "x0", x0)
            if x0.shape != (self.n,):
                raise InvalidInputError(
                    f"ground-truth shape {x0.shape} does not match n={self.n}"
                )
            if not np.all(np.isfinite(x0)):
                raise InvalidInputError("ground truth must be finite")


@dataclass(frozen=True, eq=False)
class SolverConfig:
    """Solver parameters shared by every iterative method.

    ``lam`` is the regularization weight λ; None resolves to the preset rule
    λ = 1e-4·β at solve time. ``beta`` is the gradient step size; None
    resolves to 1/‖A‖₂². ``eps`` may be a scalar (broadcast to length n) or a
    length-n vector, strictly positive.

    The default iteration scheme applies Nesterov extrapolation
    (``accelerate=True``) and a geometric λ warm-up from ``lam_init`` (None →
    1e3·λ, i.e. 1e-1·β under the preset rule) down to ``lam`` over the first
    ``continuation_iters`` iterations, with the tolerance stop armed only
    afterwards. Set ``accelerate=False, continuation_iters=0`` for the plain
    constant-λ iteration.

    ``iht_step`` selects the hard-thresholding step size: "adaptive" uses the
    exact line-search step μ = ‖g_S‖²/‖A g_S‖² on the current support,
    "fixed" uses β.
    """

    q: float = 0.05
    lam: float | None = None
    eps: float | np.ndarray = 1.0
    beta: float | None = None
    tol: float = 1e-7
    max_iter: int = 20_000
    gamma: float = 0.0
    x_init: np.ndarray | None = None
    accelerate: bool = True
    lam_init: float | None = None
    continuation_iters: int = 10_000
    iht_step: str = "adaptive"

    def __post_init__(self):
        if not (0.0 < self.q <= 1.0):
            raise InvalidInputError(f"need q in (0, 1], got {self.q}")
        if self.lam is not None and self.lam < 0:
            raise InvalidInputError(f"need lam >= 0, got {self.lam}")
        if self.beta is not None and self.beta <= 0:
            raise InvalidInputError(f"need beta > 0, got {self.beta}")
        if not (self.tol > 0):
            raise InvalidInputError(f"need tol > 0, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidInputError(f"need max_iter >= 1, got {self.max_iter}")
        if self.gamma < 0:
            raise InvalidInputError(f"need gamma >= 0, got {self.gamma}")
        if self.continuation_iters < 0:
            raise InvalidInputError("need continuation_iters >= 0")
        if self.iht_step not in ("adaptive", "fixed"):
            raise InvalidInputError(
                f"iht_step must be 'adaptive' or 'fixed', got {self.iht_step!r}"
            )
        eps = self.eps
        if np.isscalar(eps):
            if not (eps > 0):
                raise InvalidInputError(f"need eps > 0, got {eps}")
        else:
            eps = np.asarray(eps, dtype=float)
            object.__setattr__(self, "eps", eps)
            if eps.ndim != 1 or not np.all(eps > 0):
                raise InvalidInputError("eps must be a strictly positive vector")


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    """Outcome of one solver run.

    ``relative_error`` and ``snr_db`` are NaN when the instance has no ground
    truth. ``converged`` is True iff the stopping rule ‖xᵗ−xᵗ⁻¹‖₂ < tol fired
    at or before max_iter.
    """

    x_star: np.ndarray
    relative_error: float
    snr_db: float
    iterations: int
    converged: bool
    wall_time_s: float


@dataclass(eq=False)
class IterateTrace:
    """Per-iteration diagnostics; all lists share one length.

    ``objective`` records the solver's own objective (the ε-smoothed ℓq
    objective for the adaptive-threshold solvers at the final λ, the ℓ1
    objective for ISTA/FISTA, ½‖y−Ax‖₂² for IHT). ``rel_error`` is NaN-filled
    when the instance has no ground truth. ``iterates`` optionally stores a
    copy of every iterate (opt-in; used by equivalence tests).
    """

    objective: list[float] = field(default_factory=list)
    rel_error: list[float] = field(default_factory=list)
    residual_norm: list[float] = field(default_factory=list)
    elapsed_s: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] | None = None

    def __len__(self):
        return len(self.objective)


# ---------------------------------------------------------------------------
# spectral norm
# ---------------------------------------------------------------------------


def spectral_norm(a) -> float:
    """Largest singular value of ``a`` by power iteration on AᵀA.

    Deterministic: starts from the normalized all-ones vector and stops at
    relative accuracy 1e-10 or 10,000 power steps, whichever comes first.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise InvalidInputError("matrix must be non-empty")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix entries must be finite")
    n = a.shape[1]
    v = np.ones(n) / math.sqrt(n)
    est = 0.0
    for _ in range(10_000):
        w = a.T @ (a @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:  # zero matrix (or v in the null space of a rank-0 map)
            return 0.0
        prev, est = est, nw
        v = w / nw
        if abs(est - prev) <= 1e-10 * est:
            break
    return math.sqrt(est)


# ---------------------------------------------------------------------------
# seeded generators (PCG64)
# ---------------------------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate_gaussian_matrix(
    m: int, n: int, column_normalized: bool, seed: int
) -> np.ndarray:
    """m×n matrix of i.i.d. Gaussians: N(0,1), or N(0,1/m) when normalized."""
    if m <= 0 or n <= 0:
        raise InvalidInputError(f"need positive dimensions, got m={m}, n={n}")
    a = _rng(seed).standard_normal((m, n))
    if column_normalized:
        a /= math.sqrt(m)
    return a


def generate_k_sparse_signal(n: int, k: int, seed: int) -> np.ndarray:
    """Length-n vector with exactly k standard-Gaussian nonzeros on a uniform support."""
    if not (0 <= k <= n):
        raise InvalidInputError(f"need 0 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    x = np.zeros(n)
    support = rng.choice(n, size=k, replace=False)
    values = rng.standard_normal(k)
    while np.any(values == 0.0):  # keep the support size exact
        zeros = values == 0.0
        values[zeros] = rng.standard_normal(int(zeros.sum()))
    x[support] = values
    return x


def generate_bernoulli_gaussian(n: int, p: float, seed: int) -> np.ndarray:
    """Each entry independently nonzero with probability p, values N(0,1)."""
    if not (0.0 <= p <= 1.0):
        raise InvalidInputError(f"need p in [0, 1], got {p}")
    rng = _rng(seed)
    active = rng.random(n) < p
    x = np.zeros(n)
    x[active] = rng.standard_normal(int(active.sum()))
    return x


def add_noise_snr(y, snr_db: float, seed: int) -> np.ndarray:
    """Return y + e with ‖y‖₂²/‖e‖₂² equal to 10^(snr_db/10) exactly.

    A Gaussian direction is drawn and rescaled to the exact target power, so
    the ratio holds per-instance rather than in expectation.
    """
    y = np.asarray(y, dtype=float)
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        raise InvalidInputError("signal power is zero; SNR undefined")
    if not np.isfinite(snr_db):
        raise InvalidInputError("snr_db must be finite")
    g = _rng(seed).standard_normal(y.shape[0])
    e = g * (ny / (float(np.linalg.norm(g)) * 10.0 ** (snr_db / 20.0)))
    return y + e


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def relative_error(x_star, x0) -> float:
    """‖x*−x0‖₂ / ‖x0‖₂."""
    x_star = np.asarray(x_star, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n0 = float(np.linalg.norm(x0))
    if n0 == 0.0:
        raise InvalidInputError("ground truth is zero; relative error undefined")
    return float(np.linalg.norm(x_star - x0)) / n0


def snr_db(x_star, x0) -> float:
    """10·log₁₀(‖x0‖₂²/‖x*−x0‖₂²), capped at +300 dB for exact recovery."""
    x_star = np.asarray(x_star, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n0 = float(np.linalg.norm(x0))
    if n0 == 0.0:
        raise InvalidInputError("ground truth is zero; SNR undefined")
    err = float(np.linalg.norm(x_star - x0))
    if err == 0.0:
        return SNR_CAP_DB
    return min(20.0 * math.log10(n0 / err), SNR_CAP_DB)


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------


def _check_q(q: float):
    if not (0.0 < q <= 1.0):
        raise InvalidInputError(f"need q in (0, 1], got {q}")


def _check_eps(eps, n: int) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.ndim == 0:
        eps = np.full(n, float(eps))
    if eps.shape != (n,):
        raise InvalidInputError(f"eps shape {eps.shape} does not match n={n}")
    if not np.all(eps > 0):
        raise InvalidInputError("eps must be strictly positive componentwise")
    return eps


def _data_term(x, inst: ProblemInstance) -> float:
    r = inst.y - inst.a @ x
    return 0.5 * float(np.dot(r, r))


def objective_lq(x, inst: ProblemInstance, lam: float, q: float) -> float:
    """½‖y−Ax‖₂² + λ·Σ|xᵢ|^q  (with 0^q = 0; q=1 is the ℓ1 objective)."""
    _check_q(q)
    x = np.asarray(x, dtype=float)
    return _data_term(x, inst) + lam * float(np.sum(np.abs(x) ** q))


def objective_approx(x, inst: ProblemInstance, lam: float, q: float, eps) -> float:
    """½‖y−Ax‖₂² + λ·Σ|xᵢ|/(|xᵢ|+εᵢ)^(1−q), the ε-smoothed ℓq objective."""
    _check_q(q)
    x = np.asarray(x, dtype=float)
    eps = _check_eps(eps, x.shape[0])
    ax = np.abs(x)
    return _data_term(x, inst) + lam * float(np.sum(ax / (ax + eps) ** (1.0 - q)))


def functional_h(x, c, inst: ProblemInstance, lam: float, q: float, eps) -> float:
    """½‖y−Ax‖₂² + λ·Σ|xᵢ|/(|cᵢ|+εᵢ)^(1−q): the split objective in (x, c).

    Coincides with :func:`objective_approx` exactly at c = x.
    """
    _check_q(q)
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    eps = _check_eps(eps, x.shape[0])
    if c.shape != x.shape:
        raise InvalidInputError("x and c must have the same shape")
    return _data_term(x, inst) + lam * float(
        np.sum(np.abs(x) / (np.abs(c) + eps) ** (1.0 - q))
    )


# ---------------------------------------------------------------------------
# instance construction
# ---------------------------------------------------------------------------


def derive_seed(master_seed: int, *key: int) -> int:
    """Collision-resistant uint64 from a master seed and an integer key path.

    Uses numpy's SeedSequence spawn-key mixing, the documented derivation for
    every per-trial stream in the benchmark harness.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_instance(
    n: int,
    m: int,
    k: int,
    *,
    column_normalized: bool = False,
    signal: str = "k-sparse",
    p: float | None = None,
    noise_snr_db: float | None = None,
    seed: int = 0,
) -> ProblemInstance:
    """Generate a full synthetic instance from one seed.

    The seed is split into independent matrix/signal/noise streams via
    SeedSequence spawning, so instances with distinct seeds share nothing.
    ``signal`` is "k-sparse" (exactly k nonzeros) or "bernoulli-gaussian"
    (activation probability ``p``, defaulting to k/n).
    """
    ss = np.random.SeedSequence(seed)
    seed_a, seed_x, seed_e = (
        int(child.generate_state(1, dtype=np.uint64)[0]) for child in ss.spawn(3)
    )
    a = generate_gaussian_matrix(m, n, column_normalized, seed_a)
    if signal == "k-sparse":
        x0 = generate_k_sparse_signal(n, k, seed_x)
    elif signal == "bernoulli-gaussian":
        x0 = generate_bernoulli_gaussian(n, k / n if p is None else p, seed_x)
    else:
        raise InvalidInputError(
            f"signal must be 'k-sparse' or 'bernoulli-gaussian', got {signal!r}"
        )
    y = a @ x0
    if noise_snr_db is not None:
        y = add_noise_snr(y, noise_snr_db, seed_e)
    return ProblemInstance(
        a=a, y=y, x0=x0, m=m, n=n, k=k, noise_snr_db=noise_snr_db, seed=seed
    )


# ---------------------------------------------------------------------------
# plain-text instance serialization
# ---------------------------------------------------------------------------
#
# Grammar (space-separated decimals, 17 significant digits):
#   line 1:           m n k noise_snr_db seed      (noise_snr_db: number or `none`)
#   lines 2 .. m+1:   n entries — row i of the sensing matrix
#   line m+2:         m entries — the measurement y
#   line m+3:         n entries — the ground truth x0, or the literal `none`


def _fmt_vec(v) -> str:
    return " ".join(f"{float(t):.17g}" for t in v)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def save_instance(inst: ProblemInstance, path: str):
    """Write an instance in the plain-text format (atomic: temp + rename)."""
    snr = "none" if inst.noise_snr_db is None else f"{inst.noise_snr_db:.17g}"
    lines = [f"{inst.m} {inst.n} {inst.k} {snr} {inst.seed}"]
    lines.extend(_fmt_vec(row) for row in inst.a)
    lines.append(_fmt_vec(inst.y))
    lines.append("none" if inst.x0 is None else _fmt_vec(inst.x0))
    _atomic_write(path, "\n".join(lines) + "\n")


def _parse_floats(token_line: str, count: int, lineno: int) -> np.ndarray:
    parts = token_line.split()
    if len(parts) != count:
        raise FormatError(
            f"line {lineno}: expected {count} values, found {len(parts)}"
        )
    try:
        return np.array([float(t) for t in parts])
    except ValueError as exc:
        raise FormatError(f"line {lineno}: {exc}") from None


def load_instance(path: str) -> ProblemInstance:
    """Parse an instance file; raises FormatError with the offending line."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("line 1: missing header")
    head = lines[0].split()
    if len(head) != 5:
        raise FormatError(
            f"line 1: header needs 5 fields (m n k noise_snr_db seed), found {len(head)}"
        )
    try:
        m, n, k = int(head[0]), int(head[1]), int(head[2])
        snr = None if head[3] == "none" else float(head[3])
        seed = int(head[4])
    except ValueError as exc:
        raise FormatError(f"line 1: {exc}") from None
    expected = 1 + m + 2
    if len(lines) < expected:
        raise FormatError(
            f"file truncated: expected {expected} lines, found {len(lines)}"
        )
    a = np.empty((m, n))
    for i in range(m):
        a[i] = _parse_floats(lines[1 + i], n, lineno=2 + i)
    y = _parse_floats(lines[1 + m], m, lineno=2 + m)
    x0_line = lines[2 + m].strip()
    x0 = None if x0_line == "none" else _parse_floats(x0_line, n, lineno=3 + m)
    try:
        return ProblemInstance(
            a=a, y=y, x0=x0, m=m, n=n, k=k, noise_snr_db=snr, seed=seed
        )
    except InvalidInputError as exc:
        raise FormatError(f"invalid instance data: {exc}") from None
