"""Command-line interface.

Subcommands::

    generate         draw a random instance and write it to a file
    solve            solve one instance file, print a summary
    sweep            success-rate sweep over a sparsity range, write CSV
    trace            per-iteration convergence trace of one instance, write CSV
    validate-params  check a layer-parameter JSON file against an (m, n) shape

Exit codes: 0 success, 1 runtime failure (bad file, invalid values),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from ._kernels import backend_name
from .bench import (
    PRESETS,
    SOLVER_NAMES,
    SweepSpec,
    get_preset,
    run_convergence_trace,
    run_success_rate_sweep,
    write_csv,
)
from .core import (
    FormatError,
    InvalidInputError,
    SolverConfig,
    _atomic_write,
    load_instance,
    make_instance,
    save_instance,
)
from .solvers import (
    default_unfolded_model,
    load_layer_params,
    solve_fista,
    solve_iht,
    solve_ista,
    solve_qista,
    solve_qista_momentum,
    solve_unfolded,
)

__all__ = ["dispatch", "main", "parse_k_range"]


class _UsageError(Exception):
    """Bad argument combination (maps to exit code 2)."""


def parse_k_range(text: str) -> tuple[int, ...]:
    """Parse "K" or "START:STOP:STEP" (STOP inclusive when on the grid)."""
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise _UsageError(f"bad k range {text!r}") from None
    if len(parts) == 1:
        return (nums[0],)
    if len(parts) == 2:
        start, stop, step = nums[0], nums[1], 1
    elif len(parts) == 3:
        start, stop, step = nums
    else:
        raise _UsageError(f"bad k range {text!r}")
    if step <= 0:
        raise _UsageError(f"k range step must be positive, got {step}")
    if stop < start:
        raise _UsageError(f"k range stop {stop} below start {start}")
    return tuple(range(start, stop + 1, step))


def _add_override_args(p: argparse.ArgumentParser):
    p.add_argument("--lam", type=float, help="override the threshold penalty")
    p.add_argument("--tol", type=float, help="override the stopping tolerance")
    p.add_argument("--max-iter", type=int, help="override the iteration cap")
    p.add_argument("--gamma", type=float, help="override the momentum weight")


def _build_config(args, preset, solver: str) -> SolverConfig | None:
    """Preset (or default) config with any explicit overrides applied."""
    overrides = {}
    if args.lam is not None:
        overrides["lam"] = args.lam
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if preset is None and not overrides:
        return None
    base = preset.config(solver) if preset is not None else SolverConfig()
    return replace(base, **overrides) if overrides else base


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lqsparse",
        description="Sparse-signal recovery from compressed measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    preset_names = sorted(PRESETS)

    gen = sub.add_parser("generate", help="draw a random instance file")
    gen.add_argument("--out", required=True, help="instance file to write")
    gen.add_argument("--preset", choices=preset_names)
    gen.add_argument("--n", type=int, help="signal dimension")
    gen.add_argument("--m", type=int, help="measurement count")
    gen.add_argument("--k", type=int, required=True, help="sparsity level")
    gen.add_argument("--matrix", choices=("gaussian", "gaussian-normalized"))
    gen.add_argument("--signal", choices=("k-sparse", "bernoulli-gaussian"))
    gen.add_argument("--p", type=float, help="bernoulli-gaussian activity rate")
    gen.add_argument("--snr", type=float, help="measurement SNR in dB (noiseless if omitted)")
    gen.add_argument("--seed", type=int, default=0)

    solve = sub.add_parser("solve", help="solve one instance file")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    solve.add_argument("--preset", choices=preset_names)
    solve.add_argument("--params", help="layer-parameter JSON (unfolded solver)")
    solve.add_argument("--k", type=int, help="sparsity for iht (default: instance k)")
    solve.add_argument("--depth", type=int, default=16, help="unfolded layer count")
    solve.add_argument("--trace", help="write per-iteration CSV here")
    solve.add_argument("--out", help="write the recovered signal here")
    _add_override_args(solve)

    sweep = sub.add_parser("sweep", help="success-rate sweep, CSV output")
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--m", type=int)
    sweep.add_argument("--k", required=True, help='"K" or "START:STOP:STEP"')
    sweep.add_argument("--trials", type=int, default=20)
    sweep.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    sweep.add_argument("--preset", choices=preset_names)
    sweep.add_argument("--seed", type=int, default=0, help="master seed")
    sweep.add_argument("--out", required=True, help="CSV file to write")
    sweep.add_argument("--jobs", type=int, help="worker threads (default: all cores)")
    sweep.add_argument("--snr", type=float, help="measurement SNR in dB")
    sweep.add_argument("--success-threshold", type=float, default=1e-4)
    sweep.add_argument("--params", help="layer-parameter JSON (unfolded solver)")
    sweep.add_argument("--depth", type=int, default=16, help="unfolded layer count")
    _add_override_args(sweep)

    trace = sub.add_parser("trace", help="per-iteration convergence trace")
    trace.add_argument("--instance", required=True)
    trace.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    trace.add_argument("--preset", choices=preset_names)
    trace.add_argument("--out", required=True, help="CSV file to write")
    _add_override_args(trace)

    val = sub.add_parser("validate-params", help="check a layer-parameter file")
    val.add_argument("--params", required=True)
    val.add_argument("--m", type=int, required=True)
    val.add_argument("--n", type=int, required=True)

    return parser


def _cmd_generate(args) -> int:
    preset = get_preset(args.preset) if args.preset else None
    n = args.n if args.n is not None else (preset.n if preset else None)
    m = args.m if args.m is not None else (preset.m if preset else None)
    if n is None or m is None:
        raise _UsageError("generate needs --n and --m (or --preset)")
    if args.matrix is not None:
        column_normalized = args.matrix == "gaussian-normalized"
    else:
        column_normalized = preset.column_normalized if preset else False
    signal = args.signal or (preset.signal if preset else "k-sparse")
    p = args.p
    if signal == "bernoulli-gaussian" and p is None:
        p = args.k / n
    inst = make_instance(
        n,
        m,
        args.k,
        column_normalized=column_normalized,
        signal=signal,
        p=p,
        noise_snr_db=args.snr,
        seed=args.seed,
    )
    save_instance(inst, args.out)
    print(
        f"wrote {args.out}: n={n} m={m} k={args.k} signal={signal} "
        f"snr={'none' if args.snr is None else args.snr} seed={args.seed}"
    )
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    preset = get_preset(args.preset) if args.preset else None
    cfg = _build_config(args, preset, args.solver)
    tracing = args.trace is not None
    if args.solver == "qista":
        report, trace = solve_qista(inst, cfg, record_trace=tracing)
    elif args.solver == "ista":
        report, trace = solve_ista(inst, cfg, record_trace=tracing)
    elif args.solver == "fista":
        report, trace = solve_fista(inst, cfg, record_trace=tracing)
    elif args.solver == "iht":
        k = args.k if args.k is not None else inst.k
        report, trace = solve_iht(inst, cfg, k, record_trace=tracing)
    elif args.solver == "qista-momentum":
        report, trace = solve_qista_momentum(inst, cfg, record_trace=tracing)
    else:
        if args.params is not None:
            model = load_layer_params(args.params, inst.m, inst.n)
        else:
            model = default_unfolded_model(inst, cfg, args.depth)
        report, trace = solve_unfolded(inst, model, record_trace=tracing)
    print(f"solver={args.solver}")
    print(f"backend={backend_name()}")
    print(f"n={inst.n}")
    print(f"m={inst.m}")
    print(f"k={inst.k}")
    print(f"iterations={report.iterations}")
    print(f"converged={'true' if report.converged else 'false'}")
    print(f"relative_error={report.relative_error:.6g}")
    print(f"snr_db={report.snr_db:.6g}")
    print(f"wall_time_s={report.wall_time_s:.6g}")
    if tracing:
        write_csv(trace, args.trace)
    if args.out is not None:
        body = "\n".join("%.17g" % v for v in report.x_star) + "\n"
        _atomic_write(args.out, body)
    return 0


def _cmd_sweep(args) -> int:
    preset = get_preset(args.preset) if args.preset else None
    if preset is not None and (args.n is not None or args.m is not None):
        raise _UsageError("--n/--m conflict with --preset")
    n = preset.n if preset else args.n
    m = preset.m if preset else args.m
    if n is None or m is None:
        raise _UsageError("sweep needs --n and --m (or --preset)")
    spec = SweepSpec(
        n=n,
        m=m,
        k_values=parse_k_range(args.k),
        trials=args.trials,
        solver=args.solver,
        preset=preset,
        master_seed=args.seed,
        success_threshold=args.success_threshold,
        noise_snr_db=args.snr,
        params_path=args.params,
        unfolded_depth=args.depth,
        config=_build_config(args, preset, args.solver),
    )
    result = run_success_rate_sweep(spec, jobs=args.jobs)
    for row in result.rows:
        print(
            f"k={row.k} rate={row.success_rate:.3f} "
            f"successes={row.successes}/{row.trials} "
            f"mean_iters={row.mean_iterations:.1f} mean_re={row.mean_re:.3g}"
        )
    write_csv(result, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_trace(args) -> int:
    inst = load_instance(args.instance)
    preset = get_preset(args.preset) if args.preset else None
    cfg = _build_config(args, preset, args.solver)
    trace = run_convergence_trace(inst, args.solver, cfg)
    write_csv(trace, args.out)
    print(f"wrote {args.out} ({len(trace)} iterations)")
    return 0


def _cmd_validate_params(args) -> int:
    model = load_layer_params(args.params, args.m, args.n)
    print(f"{args.params}: ok: {model.load_summary}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "trace": _cmd_trace,
    "validate-params": _cmd_validate_params,
}


def dispatch(argv=None) -> int:
    """Parse and run one command; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help (0) and usage (2)
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (InvalidInputError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(argv)
