"""Iterative sparse-recovery solvers and the unfolded fixed-depth forward pass.

All solvers share one iteration skeleton — gradient step towards the
measurement-consistent set, then a componentwise shrinkage — and differ only
in the shrinkage rule and in how iterates are combined:

* ``solve_ista`` / ``solve_fista``: constant soft threshold θ = β·λ (the ℓ1
  proximal gradient method, plain or Nesterov-accelerated).
* ``solve_qista``: adaptive threshold λ/(|rᵢ|+εᵢ)^(1−q); the default scheme
  adds Nesterov extrapolation and a geometric λ warm-up (see SolverConfig).
* ``solve_iht``: hard thresholding onto the k largest magnitudes with an
  exact line-search step (or a fixed β step).
* ``solve_qista_momentum``: adds a geometrically decayed running sum of all
  previous descent directions to each gradient step.
* ``solve_unfolded``: runs a fixed number of layers with externally supplied
  per-layer parameters — a network forward pass, no stopping rule.

Every numeric step goes through the selected kernel backend, so any two
solver paths that are algebraically identical (e.g. the momentum solver at
γ=0 and the plain adaptive iteration) produce bit-identical iterates.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import jsonschema
import numpy as np

from . import _kernels as K
from .core import (
    FormatError,
    InvalidInputError,
    IterateTrace,
    ProblemInstance,
    RecoveryReport,
    SolverConfig,
    _atomic_write,
    objective_approx,
    objective_lq,
    relative_error,
    snr_db,
    spectral_norm,
)
from .prox import hard_threshold_keep_k

__all__ = [
    "LayerParams",
    "UnfoldedModel",
    "MomentumState",
    "LAYER_PARAMS_SCHEMA",
    "gradient_step",
    "solve_qista",
    "solve_ista",
    "solve_fista",
    "solve_iht",
    "solve_qista_momentum",
    "solve_unfolded",
    "default_unfolded_model",
    "save_layer_params",
    "load_layer_params",
]

#: λ defaults to this multiple of β when SolverConfig.lam is None.
LAM_BETA_RATIO = 1e-4
#: lam_init defaults to this multiple of λ when a warm-up is active.
LAM_INIT_RATIO = 1e3


# ---------------------------------------------------------------------------
# unfolded-model types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LayerParams:
    """Parameters of one unfolded layer: gradient map 𝒜ᵗ (n×m), λᵗ, ℰᵗ."""

    a_t: np.ndarray
    lam_t: float
    eps_t: np.ndarray

    def __post_init__(self):
        a_t = np.ascontiguousarray(self.a_t, dtype=float)
        eps_t = np.asarray(self.eps_t, dtype=float)
        object.__setattr__(self, "a_t", a_t)
        object.__setattr__(self, "eps_t", eps_t)
        if a_t.ndim != 2:
            raise InvalidInputError("layer matrix must be two-dimensional")
        if self.lam_t < 0:
            raise InvalidInputError(f"need lambda_t >= 0, got {self.lam_t}")
        if eps_t.ndim != 1 or eps_t.shape[0] != a_t.shape[0]:
            raise InvalidInputError("eps_t must have one entry per output row")
        if not np.all(eps_t > 0):
            raise InvalidInputError("eps_t must be strictly positive")


@dataclass(frozen=True, eq=False)
class UnfoldedModel:
    """An ordered stack of layers plus the shared momentum weight and q."""

    layers: tuple[LayerParams, ...]
    gamma: float
    q: float
    load_summary: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if len(self.layers) < 1:
            raise InvalidInputError("model needs at least one layer")
        if self.gamma < 0:
            raise InvalidInputError(f"need gamma >= 0, got {self.gamma}")
        if not (0.0 < self.q <= 1.0):
            raise InvalidInputError(f"need q in (0, 1], got {self.q}")
        shape = self.layers[0].a_t.shape
        for i, layer in enumerate(self.layers):
            if layer.a_t.shape != shape:
                raise InvalidInputError(
                    f"layer {i} shape {layer.a_t.shape} differs from {shape}"
                )

    @property
    def depth(self) -> int:
        return len(self.layers)


@dataclass(eq=False)
class MomentumState:
    """The stored descent directions Dʲ accumulated by the momentum pass."""

    directions: list[np.ndarray]


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Resolved:
    beta: float
    lam: float
    lam_init: float | None
    eps: np.ndarray
    x_init: np.ndarray
    g: np.ndarray  # β·Aᵀ, C-contiguous


def _resolve(inst: ProblemInstance, cfg: SolverConfig) -> _Resolved:
    beta = cfg.beta if cfg.beta is not None else 1.0 / spectral_norm(inst.a) ** 2
    lam = cfg.lam if cfg.lam is not None else LAM_BETA_RATIO * beta
    if cfg.lam_init is not None and cfg.continuation_iters == 0:
        raise InvalidInputError("lam_init requires continuation_iters > 0")
    lam_init = None
    if cfg.continuation_iters > 0 and lam > 0:
        lam_init = cfg.lam_init if cfg.lam_init is not None else LAM_INIT_RATIO * lam
        if lam_init <= 0:
            raise InvalidInputError(f"need lam_init > 0, got {lam_init}")
    eps = np.asarray(cfg.eps, dtype=float)
    if eps.ndim == 0:
        eps = np.full(inst.n, float(eps))
    if eps.shape != (inst.n,):
        raise InvalidInputError(
            f"eps shape {eps.shape} does not match n={inst.n}"
        )
    if cfg.x_init is None:
        x_init = np.zeros(inst.n)
    else:
        x_init = np.asarray(cfg.x_init, dtype=float).copy()
        if x_init.shape != (inst.n,):
            raise InvalidInputError(
                f"x_init shape {x_init.shape} does not match n={inst.n}"
            )
    return _Resolved(
        beta=beta,
        lam=lam,
        lam_init=lam_init,
        eps=eps,
        x_init=x_init,
        g=K.scaled_adjoint(inst.a, beta),
    )


def _lam_at(t: int, lam: float, lam_init: float | None, n_cont: int) -> float:
    """Geometric warm-up: λ(t) = lam_init·(lam/lam_init)^(t/n_cont), then λ."""
    if lam_init is None or t > n_cont:
        return lam
    return lam_init * (lam / lam_init) ** (t / n_cont)


def _report(
    inst: ProblemInstance, x: np.ndarray, iterations: int, converged: bool, wall: float
) -> RecoveryReport:
    if inst.x0 is None:
        re = s = float("nan")
    else:
        re = relative_error(x, inst.x0)
        s = snr_db(x, inst.x0)
    return RecoveryReport(
        x_star=x,
        relative_error=re,
        snr_db=s,
        iterations=iterations,
        converged=converged,
        wall_time_s=wall,
    )


def _record(trace: IterateTrace, inst: ProblemInstance, x, objective_fn, t0: float):
    trace.objective.append(float(objective_fn(x)))
    trace.rel_error.append(
        relative_error(x, inst.x0) if inst.x0 is not None else float("nan")
    )
    trace.residual_norm.append(float(np.linalg.norm(inst.y - inst.a @ x)))
    trace.elapsed_s.append(time.perf_counter() - t0)
    if trace.iterates is not None:
        trace.iterates.append(np.array(x, copy=True))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def gradient_step(x, inst: ProblemInstance, beta: float) -> np.ndarray:
    """One least-squares gradient step: x + β·Aᵀ(y−Ax)."""
    if beta <= 0:
        raise InvalidInputError(f"need beta > 0, got {beta}")
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise InvalidInputError(f"x shape {x.shape} does not match n={inst.n}")
    g = K.scaled_adjoint(inst.a, beta)
    res = K.sub(inst.y, K.mat_vec(inst.a, x))
    return K.add2(x, K.mat_vec(g, res))


def solve_qista(
    inst: ProblemInstance,
    cfg: SolverConfig | None = None,
    *,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Adaptive-threshold proximal gradient iteration.

    Default scheme: Nesterov extrapolation plus geometric λ warm-up, with the
    stopping rule ‖xᵗ−xᵗ⁻¹‖₂ < tol armed after the warm-up. Configure
    ``accelerate=False, continuation_iters=0`` for the plain constant-λ
    iteration. The trace objective is the ε-smoothed ℓq objective at the
    final λ.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    res_ = _resolve(inst, cfg)
    a, y, g = inst.a, inst.y, res_.g
    trace = IterateTrace(iterates=[] if record_iterates else None)
    tracing = record_trace or record_iterates

    def objective(x):
        return objective_approx(x, inst, res_.lam, cfg.q, res_.eps)

    t0 = time.perf_counter()
    x = res_.x_init
    xp = x
    tk = 1.0
    iterations = 0
    converged = False
    for t in range(1, cfg.max_iter + 1):
        lam_t = _lam_at(t, res_.lam, res_.lam_init, cfg.continuation_iters)
        if cfg.accelerate:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
            w = (tk - 1.0) / t_next
            z = K.extrapolate(x, xp, w)
        else:
            t_next = 1.0
            z = x
        r = K.add2(z, K.mat_vec(g, K.sub(y, K.mat_vec(a, z))))
        xn = K.qista_shrink(r, lam_t, res_.eps, cfg.q)
        step = K.diff_norm(xn, x)
        xp, x, tk = x, xn, t_next
        iterations = t
        if tracing:
            _record(trace, inst, x, objective, t0)
        if step < cfg.tol and t > cfg.continuation_iters:
            converged = True
            break
    return _report(inst, x, iterations, converged, time.perf_counter() - t0), trace


def _solve_l1(inst, cfg, accelerated, record_trace, record_iterates):
    """Shared ℓ1 proximal-gradient loop (plain and accelerated)."""
    cfg = cfg if cfg is not None else SolverConfig()
    res_ = _resolve(inst, cfg)
    a, y, g = inst.a, inst.y, res_.g
    theta = res_.beta * res_.lam
    trace = IterateTrace(iterates=[] if record_iterates else None)
    tracing = record_trace or record_iterates

    def objective(x):
        return objective_lq(x, inst, res_.lam, 1.0)

    t0 = time.perf_counter()
    x = res_.x_init
    xp = x
    tk = 1.0
    iterations = 0
    converged = False
    for t in range(1, cfg.max_iter + 1):
        if accelerated:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
            w = (tk - 1.0) / t_next
            z = K.extrapolate(x, xp, w)
        else:
            t_next = 1.0
            z = x
        r = K.add2(z, K.mat_vec(g, K.sub(y, K.mat_vec(a, z))))
        xn = K.soft_shrink(r, theta)
        step = K.diff_norm(xn, x)
        xp, x, tk = x, xn, t_next
        iterations = t
        if tracing:
            _record(trace, inst, x, objective, t0)
        if step < cfg.tol:
            converged = True
            break
    return _report(inst, x, iterations, converged, time.perf_counter() - t0), trace


def solve_ista(
    inst: ProblemInstance,
    cfg: SolverConfig | None = None,
    *,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Proximal gradient on the ℓ1 objective with constant threshold β·λ.

    Ignores the acceleration/warm-up fields of the config (those configure
    the adaptive-threshold family); with β ≤ 1/‖A‖₂² the objective trace is
    non-increasing.
    """
    return _solve_l1(inst, cfg, False, record_trace, record_iterates)


def solve_fista(
    inst: ProblemInstance,
    cfg: SolverConfig | None = None,
    *,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Nesterov-accelerated proximal gradient on the ℓ1 objective.

    Extrapolation weights follow the standard sequence t₁=1,
    tₖ₊₁=(1+√(1+4tₖ²))/2, weight (tₖ−1)/tₖ₊₁; no restart.
    """
    return _solve_l1(inst, cfg, True, record_trace, record_iterates)


def solve_iht(
    inst: ProblemInstance,
    cfg: SolverConfig | None = None,
    k: int | None = None,
    *,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Iterative hard thresholding: gradient step, keep the k largest entries.

    ``k`` defaults to the instance's sparsity and must be at least the true
    support size for recovery to be possible. The step size follows
    cfg.iht_step: "adaptive" performs the exact line search
    μ = ‖g_S‖²/‖A g_S‖² on the current support (the top-k gradient entries on
    the first iterate), "fixed" uses β. Every iterate is k-sparse; the trace
    objective is ½‖y−Ax‖₂².
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if k is None:
        k = inst.k
    if not (0 <= k <= inst.n):
        raise InvalidInputError(f"need 0 <= k <= n, got k={k}, n={inst.n}")
    res_ = _resolve(inst, cfg)
    a, y = inst.a, inst.y
    at = np.ascontiguousarray(a.T)
    adaptive = cfg.iht_step == "adaptive"
    trace = IterateTrace(iterates=[] if record_iterates else None)
    tracing = record_trace or record_iterates

    def objective(x):
        r = y - a @ x
        return 0.5 * float(np.dot(r, r))

    t0 = time.perf_counter()
    x = res_.x_init
    iterations = 0
    converged = False
    for t in range(1, cfg.max_iter + 1):
        res = K.sub(y, K.mat_vec(a, x))
        grad = K.mat_vec(at, res)
        if adaptive:
            support = np.flatnonzero(x)
            if support.size == 0:
                support = np.argsort(-np.abs(grad), kind="stable")[:k]
            gs = np.zeros(inst.n)
            gs[support] = grad[support]
            ags = K.mat_vec(a, gs)
            denom = float(np.dot(ags, ags))
            mu = float(np.dot(gs, gs)) / denom if denom > 0 else res_.beta
        else:
            mu = res_.beta
        xn = hard_threshold_keep_k(K.add2(x, K.scale(grad, mu)), k)
        step = K.diff_norm(xn, x)
        x = xn
        iterations = t
        if tracing:
            _record(trace, inst, x, objective, t0)
        if step < cfg.tol:
            converged = True
            break
    return _report(inst, x, iterations, converged, time.perf_counter() - t0), trace


def solve_qista_momentum(
    inst: ProblemInstance,
    cfg: SolverConfig | None = None,
    layers: int | None = None,
    *,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Adaptive-threshold iteration with direction-memory momentum.

    Each layer adds the full current descent direction Dᵗ plus the running
    sum of all previous directions, then rescales the stored sum by γ/m —
    older directions thus decay geometrically as (γ/m)^(t−j). The running sum
    M_{t+1} = (γ/m)·(M_t + D_t) realizes exactly that bookkeeping in O(n);
    at γ=0 the iteration is bit-identical to the plain adaptive iteration
    (only exact-zero vectors are added). Honors the λ warm-up but performs no
    Nesterov extrapolation; ``layers`` caps the iteration count (default
    cfg.max_iter) and the tolerance stop applies as usual.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    res_ = _resolve(inst, cfg)
    a, y, g = inst.a, inst.y, res_.g
    cap = cfg.max_iter if layers is None else layers
    if cap < 1:
        raise InvalidInputError(f"need layers >= 1, got {cap}")
    gm = cfg.gamma / inst.m
    trace = IterateTrace(iterates=[] if record_iterates else None)
    tracing = record_trace or record_iterates

    def objective(x):
        return objective_approx(x, inst, res_.lam, cfg.q, res_.eps)

    t0 = time.perf_counter()
    x = res_.x_init
    m_acc = np.zeros(inst.n)
    iterations = 0
    converged = False
    for t in range(1, cap + 1):
        lam_t = _lam_at(t, res_.lam, res_.lam_init, cfg.continuation_iters)
        d = K.mat_vec(g, K.sub(y, K.mat_vec(a, x)))
        r = K.add3(x, m_acc, d)
        m_acc = K.scale_sum(m_acc, d, gm)
        xn = K.qista_shrink(r, lam_t, res_.eps, cfg.q)
        step = K.diff_norm(xn, x)
        x = xn
        iterations = t
        if tracing:
            _record(trace, inst, x, objective, t0)
        if step < cfg.tol and t > cfg.continuation_iters:
            converged = True
            break
    return _report(inst, x, iterations, converged, time.perf_counter() - t0), trace


def solve_unfolded(
    inst: ProblemInstance,
    model: UnfoldedModel,
    *,
    x_init: np.ndarray | None = None,
    record_trace: bool = False,
    record_iterates: bool = False,
) -> tuple[RecoveryReport, IterateTrace]:
    """Run exactly the model's layers — a forward pass with no stopping rule.

    Layer t computes Dᵗ = 𝒜ᵗ(y−Ax), adds xᵗ⁻¹ plus every stored direction
    plus Dᵗ, rescales all stored directions by γ/m, and applies the adaptive
    shrinkage with (λᵗ, ℰᵗ). The stored-direction list is kept literally
    (depths are small); the report's ``converged`` is always False since no
    tolerance rule runs.
    """
    layer_shape = model.layers[0].a_t.shape
    if layer_shape != (inst.n, inst.m):
        raise InvalidInputError(
            f"layer shape {layer_shape} does not match (n, m)=({inst.n}, {inst.m})"
        )
    if x_init is None:
        x = np.zeros(inst.n)
    else:
        x = np.asarray(x_init, dtype=float).copy()
        if x.shape != (inst.n,):
            raise InvalidInputError(
                f"x_init shape {x.shape} does not match n={inst.n}"
            )
    a, y = inst.a, inst.y
    gm = model.gamma / inst.m
    state = MomentumState(directions=[])
    trace = IterateTrace(iterates=[] if record_iterates else None)
    tracing = record_trace or record_iterates

    def objective(xv):
        # evaluated with the final layer's (λ, ε) — a fixed, documented choice
        last = model.layers[-1]
        return objective_approx(xv, inst, last.lam_t, model.q, last.eps_t)

    t0 = time.perf_counter()
    for layer in model.layers:
        d = K.mat_vec(layer.a_t, K.sub(y, K.mat_vec(a, x)))
        r = x
        for dj in state.directions:
            r = K.add2(r, dj)
        r = K.add2(r, d)
        state.directions = [K.scale(dj, gm) for dj in state.directions]
        state.directions.append(K.scale(d, gm))
        x = K.qista_shrink(r, layer.lam_t, layer.eps_t, model.q)
        if tracing:
            _record(trace, inst, x, objective, t0)
    wall = time.perf_counter() - t0
    return _report(inst, x, model.depth, False, wall), trace


# ---------------------------------------------------------------------------
# unfolded parameter plumbing
# ---------------------------------------------------------------------------


def default_unfolded_model(
    inst: ProblemInstance, cfg: SolverConfig | None = None, depth: int = 16
) -> UnfoldedModel:
    """Model with every layer set to the solver defaults: 𝒜ᵗ=β·Aᵀ, λᵗ=λ, ℰᵗ=ε."""
    if depth < 1:
        raise InvalidInputError(f"need depth >= 1, got {depth}")
    cfg = cfg if cfg is not None else SolverConfig()
    res_ = _resolve(inst, cfg)
    layer = LayerParams(a_t=res_.g, lam_t=res_.lam, eps_t=res_.eps)
    return UnfoldedModel(layers=(layer,) * depth, gamma=cfg.gamma, q=cfg.q)


LAYER_PARAMS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["T", "gamma", "q", "layers"],
    "additionalProperties": False,
    "properties": {
        "T": {"type": "integer", "minimum": 1},
        "gamma": {"type": "number", "minimum": 0},
        "q": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "layers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["A_t", "lambda_t", "eps_t"],
                "additionalProperties": False,
                "properties": {
                    "A_t": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "number"},
                        },
                    },
                    "lambda_t": {"type": "number", "minimum": 0},
                    "eps_t": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "number"},
                    },
                },
            },
        },
    },
}

#: Loaded ℰᵗ entries below this value are clamped up to it.
EPS_CLAMP = 0.1


def save_layer_params(model: UnfoldedModel, path: str):
    """Serialize a model to the JSON layer-parameter format (atomic write).

    A_t is stored as an n×m nested array (row-major). Floats round-trip
    exactly (shortest-repr decimal encoding).
    """
    doc = {
        "T": model.depth,
        "gamma": model.gamma,
        "q": model.q,
        "layers": [
            {
                "A_t": layer.a_t.tolist(),
                "lambda_t": layer.lam_t,
                "eps_t": layer.eps_t.tolist(),
            }
            for layer in model.layers
        ],
    }
    _atomic_write(path, json.dumps(doc) + "\n")


def load_layer_params(path: str, m: int, n: int) -> UnfoldedModel:
    """Load and validate a layer-parameter file for an m×n instance.

    Validates against LAYER_PARAMS_SCHEMA (format errors name the offending
    field), checks dimensions and finiteness, and clamps every ℰᵗ component
    to at least 0.1; clamping events are reported in ``model.load_summary``.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from None
    try:
        jsonschema.validate(doc, LAYER_PARAMS_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = exc.json_path if exc.json_path else "$"
        raise FormatError(f"{path}: {where}: {exc.message}") from None
    if doc["T"] != len(doc["layers"]):
        raise FormatError(
            f"{path}: $.T: declares {doc['T']} layers, found {len(doc['layers'])}"
        )
    if not (np.isfinite(doc["gamma"]) and np.isfinite(doc["q"])):
        raise InvalidInputError(f"{path}: gamma and q must be finite")
    layers = []
    clamped = 0
    for i, raw in enumerate(doc["layers"]):
        a_t = np.array(raw["A_t"], dtype=float)
        if a_t.ndim != 2 or a_t.shape != (n, m):
            raise InvalidInputError(
                f"{path}: layer {i}: A_t shape {a_t.shape} does not match "
                f"(n, m)=({n}, {m})"
            )
        eps_t = np.array(raw["eps_t"], dtype=float)
        if eps_t.shape != (n,):
            raise InvalidInputError(
                f"{path}: layer {i}: eps_t length {eps_t.shape[0]} != n={n}"
            )
        lam_t = float(raw["lambda_t"])
        if not (
            np.all(np.isfinite(a_t))
            and np.all(np.isfinite(eps_t))
            and np.isfinite(lam_t)
        ):
            raise InvalidInputError(f"{path}: layer {i}: non-finite values")
        below = int(np.sum(eps_t < EPS_CLAMP))
        if below:
            clamped += below
            eps_t = np.maximum(eps_t, EPS_CLAMP)
        layers.append(LayerParams(a_t=a_t, lam_t=lam_t, eps_t=eps_t))
    summary = (
        f"loaded {len(layers)} layers ({n}x{m}); "
        f"clamped {clamped} eps entries to {EPS_CLAMP}"
    )
    return UnfoldedModel(
        layers=tuple(layers),
        gamma=float(doc["gamma"]),
        q=float(doc["q"]),
        load_summary=summary,
    )
