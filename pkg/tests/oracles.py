"""Independent reference computations the test suite checks the library against.

Everything here is deliberately slow, simple, and derivation-free: scalar
golden-section searches (in extended precision, so the flat bottom of a
quadratic doesn't eat the answer), zooming 2-D grid scans, cyclic coordinate
descent with a subgradient certificate, exhaustive support enumeration, and
dense SVD. None of it shares code or closed forms with the package.
"""

import itertools
import math

import numpy as np
import scipy.linalg

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo, hi, iters=120):
    """Golden-section minimizer of a unimodal f on [lo, hi].

    Runs in extended precision: with the bracket shrinking by 0.618 per step,
    the limiting accuracy is the √eps flatness floor of the arithmetic, which
    for float64 (~1.5e-8) would be too coarse to certify 1e-8 agreement.
    """
    a = np.longdouble(lo)
    b = np.longdouble(hi)
    g = np.longdouble(GOLDEN)
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def prox_l1_1d(r, theta):
    """argmin_z ½(z−r)² + θ|z|, by golden section on each half-line.

    The objective is convex and smooth on z ≤ 0 and on z ≥ 0 separately, so
    searching both half-lines and keeping the better of the two minimizers
    (and the kink at 0) covers every case.
    """
    r = np.longdouble(r)
    theta = np.longdouble(theta)

    def f(z):
        return (z - r) ** 2 / 2 + theta * abs(z)

    span = abs(r) + theta + 1
    cands = [np.longdouble(0.0), golden_section_min(f, -span, 0), golden_section_min(f, 0, span)]
    return float(min(cands, key=f))


def grid_min_2d(fvec, center, halfwidth, final_cell=3e-9, grid=41):
    """Zooming grid scan for a 2-D convex function.

    ``fvec`` maps a (2, N) array of points to N values. Each stage scans a
    grid×grid window and re-centers a window of ±2.5 cells on the best node;
    for convex objectives of the isotropic-quadratic-plus-polyhedral kind the
    minimizer stays inside every window.
    """
    c = np.asarray(center, dtype=float).copy()
    h = float(halfwidth)
    while True:
        xs = np.linspace(c[0] - h, c[0] + h, grid)
        ys = np.linspace(c[1] - h, c[1] + h, grid)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()])
        c = pts[:, int(np.argmin(fvec(pts)))].copy()
        cell = 2.0 * h / (grid - 1)
        if cell <= final_cell:
            return c
        h = 2.5 * cell


def weighted_prox_2d(r, psi, b, w, gamma):
    """argmin_z ½‖z−r‖² + Σᵢ wᵢ|(ψz+b)ᵢ| for 2-vectors, by brute force.

    Enumerates every sign pattern of the penalty terms (each of the p rows
    is on its kink line, strictly positive, or strictly negative — 3^p
    cases), solves the smooth problem of each case exactly from first-order
    stationarity, keeps the candidates whose sign/subgradient bounds hold,
    and returns the best. A zooming grid scan cross-checks the result: the
    exact answer can never score worse than a sampled one.

    Works for any ψ with independent rows — no scaled-orthogonality
    assumption enters anywhere.
    """
    r = np.asarray(r, dtype=float)
    psi = np.asarray(psi, dtype=float)
    b = np.asarray(b, dtype=float)
    p = psi.shape[0]
    w = np.broadcast_to(np.asarray(w, dtype=float), (p,))

    def f(x):
        return 0.5 * float(np.sum((x - r) ** 2)) + float(w @ np.abs(psi @ x + b))

    best = None
    for signs in itertools.product((-1, 0, 1), repeat=p):
        s = np.array(signs, dtype=float)
        active = np.flatnonzero(s == 0)
        inactive = np.flatnonzero(s != 0)
        # stationarity off the kinks: x = r − Σ_inactive wᵢsᵢψᵢ − Σ_active μᵢψᵢ
        r0 = r - (w[inactive] * s[inactive]) @ psi[inactive]
        if active.size:
            ps = psi[active]
            gram = ps @ ps.T
            if abs(np.linalg.det(gram)) < 1e-12:
                continue  # parallel kink lines; pattern cannot pin a point
            mu = np.linalg.solve(gram, ps @ r0 + b[active])
            x = r0 - mu @ ps
            if np.any(np.abs(mu) > w[active] + 1e-10):
                continue  # subgradient coefficient out of range
        else:
            x = r0
        lin = psi @ x + b
        if np.any(s[inactive] * lin[inactive] < -1e-10):
            continue  # assumed sign contradicted
        if best is None or f(x) < f(best):
            best = x
    if best is None:
        raise RuntimeError("no sign pattern produced a feasible stationary point")

    def fvec(pts):
        quad = 0.5 * np.sum((pts - r[:, None]) ** 2, axis=0)
        return quad + w @ np.abs(psi @ pts + b[:, None])

    radius = float(np.sum(w * np.linalg.norm(psi, axis=1))) + 1.0
    sampled = grid_min_2d(fvec, r, radius, final_cell=1e-4)
    if f(best) > f(sampled) + 1e-9:
        raise RuntimeError(
            f"sign-pattern solution {best} scored worse than a grid point "
            f"{sampled}: {f(best)} > {f(sampled)}"
        )
    return best


def lasso_min_2d(a, y, lam, sweeps=20000):
    """argmin_x ½‖y−Ax‖² + λ‖x‖₁ for n = 2, any m.

    A coarse grid scan finds the basin, cyclic coordinate descent with exact
    (golden-section) coordinate updates polishes it — valid here because the
    nonsmooth part is separable — and a subgradient stationarity check
    certifies the result. Raises RuntimeError instead of returning a point
    that fails certification.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    if a.shape[1] != 2:
        raise ValueError("this oracle is for n = 2 only")

    def fvec(pts):
        res = y[:, None] - a @ pts
        return 0.5 * np.sum(res * res, axis=0) + lam * np.sum(np.abs(pts), axis=0)

    radius = 0.5 * float(y @ y) / lam + 1.0
    x = grid_min_2d(fvec, (0.0, 0.0), radius, final_cell=1e-3)
    col_sq = [float(a[:, i] @ a[:, i]) for i in range(2)]
    for _ in range(sweeps):
        x_prev = x.copy()
        for i in range(2):
            partial = y - a @ x + a[:, i] * x[i]
            if col_sq[i] == 0.0:
                x[i] = 0.0
                continue
            x[i] = prox_l1_1d(float(a[:, i] @ partial) / col_sq[i], lam / col_sq[i])
        if float(np.max(np.abs(x - x_prev))) < 1e-15:
            break
    # golden section can leave a ~1e-18 remnant where the true coordinate is
    # exactly 0; snap it so the subgradient certificate tests the right branch
    for i in range(2):
        if x[i] != 0.0 and abs(x[i]) <= 1e-8:
            snapped = x.copy()
            snapped[i] = 0.0
            if fvec(snapped[:, None])[0] <= fvec(x[:, None])[0] + 1e-12:
                x = snapped
    g = a.T @ (a @ x - y)
    slack = 1e-6 * max(1.0, lam)
    for i in range(2):
        ok = (
            abs(g[i] + lam * np.sign(x[i])) <= slack
            if x[i] != 0.0
            else abs(g[i]) <= lam + slack
        )
        if not ok:
            raise RuntimeError(
                f"lasso oracle failed stationarity at coordinate {i}: "
                f"x={x}, g={g}, lam={lam}"
            )
    return x


def l0_exhaustive(a, y, k):
    """Best exactly-k-sparse least-squares fit by enumerating all supports.

    Ties break to the lexicographically first support, which makes the
    oracle deterministic.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    n = a.shape[1]
    best_r2 = None
    best = None
    for supp in itertools.combinations(range(n), k):
        cols = a[:, list(supp)]
        coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
        res = y - cols @ coef
        r2 = float(res @ res)
        if best_r2 is None or r2 < best_r2:
            best_r2 = r2
            best = (supp, coef)
    x = np.zeros(n)
    x[list(best[0])] = best[1]
    return x


def dense_spectral_norm(a):
    """Largest singular value via LAPACK on the dense matrix."""
    return float(scipy.linalg.svdvals(np.asarray(a, dtype=float))[0])


def reference_adaptive_iteration(a, y, lam, eps, q, beta, iters, x=None):
    """Plain-NumPy transcription of the constant-λ adaptive-threshold loop.

    No extrapolation, no warm-up, no stopping rule — runs exactly ``iters``
    steps and returns the final point. Used to pin the solver's wiring.
    """
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (a.shape[1],))
    x = np.zeros(a.shape[1]) if x is None else np.asarray(x, dtype=float).copy()
    g = beta * a.T
    for _ in range(iters):
        r = x + g @ (y - a @ x)
        mag = np.abs(r) - lam / (np.abs(r) + eps) ** (1.0 - q)
        x = np.sign(r) * np.maximum(mag, 0.0)
    return x


def reference_l1_iteration(a, y, lam, beta, iters, accelerated=False):
    """Plain-NumPy transcription of the constant-threshold ℓ1 loop."""
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    n = a.shape[1]
    x = np.zeros(n)
    xp = x
    tk = 1.0
    g = beta * a.T
    theta = beta * lam
    for _ in range(iters):
        if accelerated:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
            z = x + ((tk - 1.0) / t_next) * (x - xp)
        else:
            t_next = 1.0
            z = x
        r = z + g @ (y - a @ z)
        xn = np.sign(r) * np.maximum(np.abs(r) - theta, 0.0)
        xp, x, tk = x, xn, t_next
    return x
