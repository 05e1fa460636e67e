"""Quantized density evolution for LDPC ensembles on symmetric channels.

Variable-node convolution runs on full signed grids via FFT with saturation of
anything beyond the grid edge to +inf.  Check-node box-plus runs on |LLR|
masses only: for a symmetric density the sign given |M| = x is fixed
(Pr(M < 0 | |M| = x) = 1/(1+e^x)), so the magnitude mass vector carries the
whole density and symmetry is exact after re-expansion.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from . import kernels
from .density import (
    Grid,
    SymmetricDensity,
    _expand,
    _fold,
    bhattacharyya,
    error_prob,
)
from .ensemble import DegreeDistribution
from .errors import GridError

DEFAULT_TARGET = 1e-9
DEFAULT_MAX_ITER = 2000
# masses below this are floating-point noise from the FFT and are dropped
PRUNE = 1e-24


def default_workers() -> int:
    env = os.environ.get("UL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


class _GridOps:
    """Per-grid lookup tables shared by every evolution on that grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        k = grid.half
        # box-plus correction log1p(exp(-t)) in units of bins, t = 0 .. 2*half
        t = np.arange(2 * k + 1) * grid.step
        self.corr = np.log1p(np.exp(-t)) / grid.step
        # separation beyond which the correction is under one bin
        self.near = int(np.argmax(self.corr < 1.0)) if np.any(self.corr < 1.0) else 2 * k + 1
        self.nfft = sfft.next_fast_len(2 * grid.bins - 1, real=True)


@lru_cache(maxsize=8)
def grid_ops(grid: Grid) -> _GridOps:
    return _GridOps(grid)


# ---------------------------------------------------------------------------
# raw-array operations.  A "mag" state is (magnitude masses, +inf mass); a
# "full" state is (_Full) with the signed mass vector and a cached spectrum.


class _Full:
    __slots__ = ("f", "inf", "ftot", "_spec", "nfft")

    def __init__(self, f, inf, nfft):
        self.f = f
        self.inf = float(inf)
        self.ftot = float(f.sum())
        self.nfft = nfft
        self._spec = None

    @property
    def spec(self):
        if self._spec is None:
            self._spec = sfft.rfft(self.f, self.nfft)
        return self._spec


def _vconv(ops: _GridOps, u: _Full, v: _Full) -> _Full:
    grid = ops.grid
    n, k = grid.bins, grid.half
    r = sfft.irfft(u.spec * v.spec, ops.nfft)[: 2 * n - 1]
    np.maximum(r, 0.0, out=r)
    core = r[k : k + n].copy()
    over = float(r[:k].sum() + r[k + n :].sum())
    inf = u.inf * (v.ftot + v.inf) + v.inf * u.ftot + over
    return _Full(core, inf, ops.nfft)


def _chk(ops: _GridOps, u, v):
    mu, iu = u
    mv, iv = v
    out = kernels.boxplus_magnitudes(mu, mv, ops.corr, ops.near)
    # +inf is the box-plus identity
    out += iu * mv + iv * mu
    return out, iu * iv


def _powers(base, exps, op, square):
    """base^e for each e in ``exps`` (sorted ascending), sharing partial products."""
    cache = {1: base}

    def power(e):
        if e in cache:
            return cache[e]
        half = power(e // 2)
        res = square(half)
        if e % 2:
            res = op(res, base)
        cache[e] = res
        return res

    out = {}
    prev_e, prev = None, None
    for e in exps:
        if prev is None:
            cur = power(e)
        else:
            cur = op(prev, power(e - prev_e))
        out[e] = cur
        prev_e, prev = e, cur
    return out


def _to_full(ops, mag, inf) -> _Full:
    return _Full(_expand(ops.grid, mag), inf, ops.nfft)


def _to_mag(ops, full: _Full):
    mag = _fold(ops.grid, full.f)
    mag[mag < PRUNE] = 0.0
    total = mag.sum() + full.inf
    return mag / total, full.inf / total


def _check_mixture(ops, prev, dd: DegreeDistribution):
    """sum_k rho_k prev^{box (k-1)} as a magnitude state."""
    exps = [k - 1 for k, _ in dd.rho]
    op = lambda a, b: _chk(ops, a, b)
    sq = lambda a: _chk(ops, a, a)
    pw = _powers(prev, [e for e in exps if e > 0], op, sq)
    mag = np.zeros(ops.grid.half + 1)
    inf = 0.0
    for (k, frac), e in zip(dd.rho, exps):
        m, i = pw[e] if e > 0 else (np.zeros_like(mag), 1.0)
        mag += frac * m
        inf += frac * i
    return mag, inf


def _variable_mixture(ops, b: _Full, dd: DegreeDistribution) -> _Full:
    """sum_i lambda_i b^{conv (i-1)} as an (unnormalized) full state."""
    exps = [d - 1 for d, _ in dd.lam]
    op = lambda x, y: _vconv(ops, x, y)
    pw = _powers(b, exps, op, lambda x: _vconv(ops, x, x))
    f = np.zeros(ops.grid.bins)
    inf = 0.0
    for (d, frac), e in zip(dd.lam, exps):
        f += frac * pw[e].f
        inf += frac * pw[e].inf
    return _Full(f, inf, ops.nfft)


def _step(ops, a0: _Full, prev, dd):
    b = _check_mixture(ops, prev, dd)
    s = _variable_mixture(ops, _to_full(ops, *b), dd)
    return _to_mag(ops, _vconv(ops, a0, s))


def _mag_functionals(grid: Grid, mag, inf):
    """(P, B) straight from |LLR| masses; equal to the signed integrals for symmetric densities."""
    p = grid.magnitude_p
    err = float(np.dot(mag, p))
    bh = float(np.dot(mag, 2.0 * np.sqrt(p * (1.0 - p))))
    return err, bh


# ---------------------------------------------------------------------------
# public operations on SymmetricDensity


def _same_grid(*densities):
    g = densities[0].grid
    for d in densities[1:]:
        if d.grid != g:
            raise GridError("densities live on different grids")
    return g


def _as_full(ops, a: SymmetricDensity) -> _Full:
    return _Full(np.array(a.mass), a.mass_pos_inf, ops.nfft)


def _as_mag(a: SymmetricDensity):
    return a.magnitudes(), a.mass_pos_inf


def _density(ops, mag, inf) -> SymmetricDensity:
    return SymmetricDensity.from_magnitudes(ops.grid, mag, inf)


def var_conv(u: SymmetricDensity, v: SymmetricDensity) -> SymmetricDensity:
    """Density of the sum of independent LLRs (variable-node operation)."""
    ops = grid_ops(_same_grid(u, v))
    return _density(ops, *_to_mag(ops, _vconv(ops, _as_full(ops, u), _as_full(ops, v))))


def chk_conv(u: SymmetricDensity, v: SymmetricDensity) -> SymmetricDensity:
    """Density of box-plus of independent LLRs (check-node operation)."""
    ops = grid_ops(_same_grid(u, v))
    mag, inf = _chk(ops, _as_mag(u), _as_mag(v))
    total = mag.sum() + inf
    return _density(ops, mag / total, inf / total)


def de_step(a0: SymmetricDensity, a_prev: SymmetricDensity, dd: DegreeDistribution) -> SymmetricDensity:
    """One density-evolution iteration: check mixture, variable mixture, channel."""
    ops = grid_ops(_same_grid(a0, a_prev))
    return _density(ops, *_step(ops, _as_full(ops, a0), _as_mag(a_prev), dd.normalized()))


@dataclass
class DEReport:
    converged: bool
    iterations_used: int
    trajectory: list = field(default_factory=list)  # (iteration, error_prob, bhattacharyya)
    reason: str = ""

    @property
    def final_error_prob(self) -> float:
        return self.trajectory[-1][1] if self.trajectory else float("nan")

    def to_csv(self, meta=None) -> str:
        buf = io.StringIO()
        for line in meta or ():
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "error_prob", "bhattacharyya"])
        for it, p, b in self.trajectory:
            w.writerow([it, repr(p), repr(b)])
        return buf.getvalue()


def evolve(a0: SymmetricDensity, dd: DegreeDistribution, iterations: int, keep_densities=False):
    """Run exactly ``iterations`` DE steps; return the trajectory (and densities if asked)."""
    ops = grid_ops(a0.grid)
    dd = dd.normalized()
    a0f = _as_full(ops, a0)
    state = _as_mag(a0)
    traj, dens = [], []
    for it in range(1, iterations + 1):
        state = _step(ops, a0f, state, dd)
        p, b = _mag_functionals(ops.grid, *state)
        traj.append((it, p, b))
        if keep_densities:
            dens.append(_density(ops, *state))
    return (traj, dens) if keep_densities else traj


def converges(
    a0: SymmetricDensity,
    dd: DegreeDistribution,
    max_iter: int = DEFAULT_MAX_ITER,
    target: float = DEFAULT_TARGET,
    stall_window: int = 20,
    stall_tol: float = 1e-7,
) -> DEReport:
    """Iterate DE until P(a_l) <= target, a stall, or ``max_iter``.

    A stall is a window of ``stall_window`` iterations over which P fell by less
    than ``stall_tol`` relative: DE has reached a nonzero fixed point.  Pass
    ``stall_window=0`` to disable.
    """
    ops = grid_ops(a0.grid)
    dd = dd.normalized()
    a0f = _as_full(ops, a0)
    state = _as_mag(a0)
    traj = []
    for it in range(1, max_iter + 1):
        state = _step(ops, a0f, state, dd)
        p, b = _mag_functionals(ops.grid, *state)
        traj.append((it, p, b))
        if p <= target:
            return DEReport(True, it, traj, "target")
        if stall_window and it > stall_window:
            old = traj[-1 - stall_window][1]
            if old - p <= stall_tol * p:
                return DEReport(False, it, traj, "stall")
    return DEReport(False, max_iter, traj, "max_iter")


def converges_all(channels, dd, max_iter=DEFAULT_MAX_ITER, target=DEFAULT_TARGET, workers=None,
                  stop_on_failure=False, **kwargs):
    """``converges`` on each channel, results in input order.

    With ``stop_on_failure`` the scan ends at the first non-converging channel
    and later slots are ``None``.
    """
    channels = list(channels)
    out = [None] * len(channels)
    if not channels:
        return out
    workers = workers or default_workers()
    run = lambda a: converges(a, dd, max_iter, target, **kwargs)
    if workers <= 1 or len(channels) == 1:
        for i, a in enumerate(channels):
            out[i] = run(a)
            if stop_on_failure and not out[i].converged:
                break
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, a) for a in channels]
        for i, fut in enumerate(futures):
            out[i] = fut.result()
            if stop_on_failure and not out[i].converged:
                for rest in futures[i + 1 :]:
                    rest.cancel()
                break
    return out
