"""Binary entropy and its inverse on [0, 1/2]."""

import math

import numpy as np

from .errors import ParameterError


def binary_entropy(p):
    """h(p) = -p log2 p - (1-p) log2 (1-p), vectorized, with h(0) = h(1) = 0."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ParameterError(f"binary entropy argument outside [0, 1]: {p!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 1.0 - arr
        out = -np.where(arr > 0, arr * np.log2(np.where(arr > 0, arr, 1.0)), 0.0)
        out -= np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


def binary_entropy_inverse(H, tol=1e-15):
    """Return p in [0, 1/2] with h(p) = H, found by bisection."""
    H = float(H)
    if not 0.0 <= H <= 1.0 or math.isnan(H):
        raise ParameterError(f"entropy value outside [0, 1]: {H!r}")
    if H == 0.0:
        return 0.0
    if H == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    # 200 halvings exhaust double precision well before the cap
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < H:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)
