"""Compare the compiled kernel backend against the pure-Python fallback.

Each backend is exercised in a fresh interpreter (the backend is fixed at
import time via LQSPARSE_BACKEND), solving the same seeded instances, and the
wall times are reported side by side.

Usage::

    python3 benchmarks/backend_benchmark.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import lqsparse as lq
from lqsparse._kernels import backend_name

quick = json.loads(sys.argv[1])
cases = [
    ("desk solve      n=256 m=128 k=8 ", 256, 128, 8, 11),
    ("preset-scale    n=1024 m=256 k=70", 1024, 256, 70, 12),
]
if quick:
    cases = cases[:1]

out = {"backend": backend_name(), "rows": []}
for label, n, m, k, seed in cases:
    inst = lq.make_instance(n, m, k, seed=seed)
    rep, _ = lq.solve_qista(inst)  # warm-up (page-in, BLAS init)
    best = float("inf")
    for _ in range(1 if n >= 1024 else 3):
        t0 = time.perf_counter()
        rep, _ = lq.solve_qista(inst)
        best = min(best, time.perf_counter() - t0)
    out["rows"].append(
        {
            "label": label,
            "seconds": best,
            "iterations": rep.iterations,
            "re": rep.relative_error,
        }
    )
print(json.dumps(out))
"""


def run_backend(backend: str, quick: bool) -> dict:
    env = dict(os.environ, LQSPARSE_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(quick)],
        capture_output=True,
        text=True,
        env=env,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"{backend} worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout.splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true", help="small case only")
    args = parser.parse_args()

    results = {}
    for backend in ("python", "c"):
        try:
            results[backend] = run_backend(backend, args.quick)
        except RuntimeError as exc:
            print(f"skipping backend {backend!r}: {exc}", file=sys.stderr)
    if not results:
        return 1

    print(f"{'case':36s} {'python':>10s} {'c':>10s} {'speedup':>8s}")
    labels = [row["label"] for row in next(iter(results.values()))["rows"]]
    for i, label in enumerate(labels):
        py = results.get("python", {}).get("rows", [None] * len(labels))[i]
        cc = results.get("c", {}).get("rows", [None] * len(labels))[i]
        py_s = f"{py['seconds']:.3f}s" if py else "-"
        cc_s = f"{cc['seconds']:.3f}s" if cc else "-"
        speed = f"{py['seconds'] / cc['seconds']:.2f}x" if py and cc else "-"
        print(f"{label:36s} {py_s:>10s} {cc_s:>10s} {speed:>8s}")
        if py and cc:
            agree = abs(py["re"] - cc["re"]) <= 1e-9 * max(1.0, abs(cc["re"]))
            if not agree:
                print(f"  WARNING: backend results differ: {py['re']} vs {cc['re']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
