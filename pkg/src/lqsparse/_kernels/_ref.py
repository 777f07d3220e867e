"""Reference numpy kernels — the pure-python backend.

Each function mirrors one compiled primitive in ``_accel.pyx``; keep the two
files in lockstep. Arithmetic notes that matter for exactness contracts:
``add3(a, b, c)`` is evaluated left-to-right as ``(a + b) + c`` in both
backends, and ``diff_norm`` squares via the same BLAS dot product numpy uses,
so solver paths that differ only by adding exact-zero vectors produce
bit-identical iterates within a backend.
"""

import math

import numpy as np

BACKEND = "python"


def mat_vec(mat, v):
    return mat @ v


def sub(a, b):
    return a - b


def add2(a, b):
    return a + b


def add3(a, b, c):
    return (a + b) + c


def extrapolate(x, xp, w):
    return x + w * (x - xp)


def scale(v, c):
    return c * v


def scale_sum(u, v, c):
    return c * (u + v)


def soft_shrink(r, theta):
    return np.sign(r) * np.maximum(np.abs(r) - theta, 0.0)


def soft_shrink_vec(r, theta):
    return np.sign(r) * np.maximum(np.abs(r) - theta, 0.0)


def qista_shrink(r, lam, eps, q):
    mag = np.abs(r)
    theta = lam / (mag + eps) ** (1.0 - q)
    return np.sign(r) * np.maximum(mag - theta, 0.0)


def diff_norm(a, b):
    d = a - b
    return math.sqrt(float(np.dot(d, d)))
