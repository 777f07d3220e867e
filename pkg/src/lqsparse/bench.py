"""Benchmark harness: presets, phase-transition sweeps, convergence traces.

A sweep fixes the problem shape (n, m, matrix/signal model) and runs
``trials`` independent random instances at each sparsity level k, recording
the fraction recovered to within a relative-error threshold. Per-trial seeds
are derived from the master seed and the cell coordinates, so results are
reproducible independent of execution order or the number of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidInputError,
    IterateTrace,
    ProblemInstance,
    RecoveryReport,
    SolverConfig,
    _atomic_write,
    derive_seed,
    make_instance,
)
from .solvers import (
    UnfoldedModel,
    default_unfolded_model,
    load_layer_params,
    solve_fista,
    solve_iht,
    solve_ista,
    solve_qista,
    solve_qista_momentum,
    solve_unfolded,
)

__all__ = [
    "Preset",
    "PRESETS",
    "get_preset",
    "SOLVER_NAMES",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_success_rate_sweep",
    "run_convergence_trace",
    "write_csv",
]

SOLVER_NAMES = ("qista", "ista", "fista", "iht", "qista-momentum", "unfolded")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    """A named problem family plus solver parameterizations.

    The adaptive-threshold family (qista, qista-momentum, unfolded) uses
    λ = qista_lam_ratio·β with a geometric warm-up from qista_lam_init_ratio·β
    over continuation_iters iterations; the ℓ1 family uses the absolute
    penalty l1_lam with no warm-up.
    """

    name: str
    n: int
    m: int
    column_normalized: bool
    signal: str  # "k-sparse" | "bernoulli-gaussian"
    gamma: float
    eps_value: float
    q: float = 0.05
    qista_lam_ratio: float = 1e-4
    qista_lam_init_ratio: float = 1e-1
    continuation_iters: int = 10_000
    l1_lam: float = 5e-3
    tol: float = 1e-7
    max_iter: int = 20_000

    def config(self, solver: str) -> SolverConfig:
        """The solver configuration this preset prescribes for ``solver``."""
        if solver not in SOLVER_NAMES:
            raise InvalidInputError(f"unknown solver {solver!r}")
        common = dict(tol=self.tol, max_iter=self.max_iter)
        if solver in ("qista", "qista-momentum", "unfolded"):
            return SolverConfig(
                q=self.q,
                lam=None,  # resolved to qista_lam_ratio·β
                eps=self.eps_value,
                gamma=self.gamma,
                accelerate=True,
                lam_init=None,  # resolved to qista_lam_init_ratio/qista_lam_ratio·λ
                continuation_iters=self.continuation_iters,
                **common,
            )
        if solver in ("ista", "fista"):
            return SolverConfig(
                lam=self.l1_lam, accelerate=False, continuation_iters=0, **common
            )
        return SolverConfig(
            iht_step="adaptive", accelerate=False, continuation_iters=0, **common
        )

    def make(self, k: int, seed: int, noise_snr_db=None) -> ProblemInstance:
        """Draw one instance of this family at sparsity k."""
        p = k / self.n if self.signal == "bernoulli-gaussian" else None
        return make_instance(
            self.n,
            self.m,
            k,
            column_normalized=self.column_normalized,
            signal=self.signal,
            p=p,
            noise_snr_db=noise_snr_db,
            seed=seed,
        )


PRESETS = {
    "paper-5.1": Preset(
        name="paper-5.1",
        n=1024,
        m=256,
        column_normalized=False,
        signal="k-sparse",
        gamma=0.0,
        eps_value=1.0,
    ),
    "paper-6.1": Preset(
        name="paper-6.1",
        n=500,
        m=250,
        column_normalized=True,
        signal="bernoulli-gaussian",
        gamma=0.1,
        eps_value=0.1,
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise InvalidInputError(f"unknown preset {name!r} (known: {known})") from None


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """One phase-transition sweep: shape, sparsity grid, solver, seeding."""

    n: int
    m: int
    k_values: tuple[int, ...]
    trials: int
    solver: str
    preset: Preset | None = None
    master_seed: int = 0
    success_threshold: float = 1e-4
    noise_snr_db: float | None = None
    params_path: str | None = None
    unfolded_depth: int = 16
    config: SolverConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        if self.trials < 1:
            raise InvalidInputError(f"need trials >= 1, got {self.trials}")
        if not self.k_values:
            raise InvalidInputError("k_values must be non-empty")
        for k in self.k_values:
            if not (1 <= k <= self.n):
                raise InvalidInputError(f"need 1 <= k <= n={self.n}, got k={k}")
        if self.solver not in SOLVER_NAMES:
            raise InvalidInputError(f"unknown solver {self.solver!r}")
        if self.success_threshold <= 0:
            raise InvalidInputError(
                f"need success_threshold > 0, got {self.success_threshold}"
            )


@dataclass(frozen=True)
class SweepRow:
    k: int
    trials: int
    successes: int
    success_rate: float
    mean_iterations: float
    mean_re: float
    mean_wall_time_s: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]


def _spec_instance(spec: SweepSpec, k: int, seed: int) -> ProblemInstance:
    if spec.preset is not None:
        return spec.preset.make(k, seed, noise_snr_db=spec.noise_snr_db)
    return make_instance(
        spec.n, spec.m, k, noise_snr_db=spec.noise_snr_db, seed=seed
    )


def _spec_config(spec: SweepSpec) -> SolverConfig:
    if spec.config is not None:
        return spec.config
    if spec.preset is not None:
        return spec.preset.config(spec.solver)
    return SolverConfig()


def _run_one(spec, cfg, model, k, trial) -> RecoveryReport:
    seed = derive_seed(spec.master_seed, k, trial)
    inst = _spec_instance(spec, k, seed)
    if spec.solver == "qista":
        report, _ = solve_qista(inst, cfg)
    elif spec.solver == "ista":
        report, _ = solve_ista(inst, cfg)
    elif spec.solver == "fista":
        report, _ = solve_fista(inst, cfg)
    elif spec.solver == "iht":
        report, _ = solve_iht(inst, cfg, inst.k)
    elif spec.solver == "qista-momentum":
        report, _ = solve_qista_momentum(inst, cfg)
    else:
        inst_model = (
            model
            if model is not None
            else default_unfolded_model(inst, cfg, spec.unfolded_depth)
        )
        report, _ = solve_unfolded(inst, inst_model)
    return report


def run_success_rate_sweep(spec: SweepSpec, jobs: int | None = None) -> SweepResult:
    """Run the sweep; results are independent of ``jobs`` (thread count)."""
    cfg = _spec_config(spec)
    model: UnfoldedModel | None = None
    if spec.solver == "unfolded" and spec.params_path is not None:
        model = load_layer_params(spec.params_path, spec.m, spec.n)
    cells = [(k, t) for k in spec.k_values for t in range(spec.trials)]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise InvalidInputError(f"need jobs >= 1, got {jobs}")
    if jobs == 1:
        reports = [_run_one(spec, cfg, model, k, t) for k, t in cells]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(
                pool.map(lambda cell: _run_one(spec, cfg, model, *cell), cells)
            )
    rows = []
    by_k = {k: [] for k in spec.k_values}
    for (k, _), report in zip(cells, reports):
        by_k[k].append(report)
    for k in spec.k_values:
        group = by_k[k]
        successes = sum(
            1 for r in group if r.relative_error <= spec.success_threshold
        )
        rows.append(
            SweepRow(
                k=k,
                trials=len(group),
                successes=successes,
                success_rate=successes / len(group),
                mean_iterations=float(np.mean([r.iterations for r in group])),
                mean_re=float(np.mean([r.relative_error for r in group])),
                mean_wall_time_s=float(np.mean([r.wall_time_s for r in group])),
            )
        )
    return SweepResult(spec=spec, rows=tuple(rows))


def run_convergence_trace(
    inst: ProblemInstance, solver: str, cfg: SolverConfig | None = None
) -> IterateTrace:
    """Solve one instance recording per-iteration diagnostics."""
    if solver == "qista":
        _, trace = solve_qista(inst, cfg, record_trace=True)
    elif solver == "ista":
        _, trace = solve_ista(inst, cfg, record_trace=True)
    elif solver == "fista":
        _, trace = solve_fista(inst, cfg, record_trace=True)
    elif solver == "iht":
        _, trace = solve_iht(inst, cfg, inst.k, record_trace=True)
    elif solver == "qista-momentum":
        _, trace = solve_qista_momentum(inst, cfg, record_trace=True)
    elif solver == "unfolded":
        model = default_unfolded_model(inst, cfg)
        _, trace = solve_unfolded(inst, model, record_trace=True)
    else:
        raise InvalidInputError(f"unknown solver {solver!r}")
    return trace


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(result, path: str):
    """Write a SweepResult or IterateTrace as CSV (atomic, %.17g floats)."""
    if isinstance(result, SweepResult):
        lines = [
            "k,trials,successes,success_rate,mean_iterations,mean_re,mean_wall_time_s"
        ]
        for row in result.rows:
            lines.append(
                ",".join(
                    [
                        _fmt(row.k),
                        _fmt(row.trials),
                        _fmt(row.successes),
                        _fmt(row.success_rate),
                        _fmt(row.mean_iterations),
                        _fmt(row.mean_re),
                        _fmt(row.mean_wall_time_s),
                    ]
                )
            )
    elif isinstance(result, IterateTrace):
        lines = ["iter,objective,rel_error,residual_norm,elapsed_s"]
        for i in range(len(result)):
            lines.append(
                ",".join(
                    [
                        str(i + 1),
                        _fmt(result.objective[i]),
                        _fmt(result.rel_error[i]),
                        _fmt(result.residual_norm[i]),
                        _fmt(result.elapsed_s[i]),
                    ]
                )
            )
    else:
        raise InvalidInputError(
            f"cannot write {type(result).__name__} as CSV"
        )
    _atomic_write(path, "\n".join(lines) + "\n")
