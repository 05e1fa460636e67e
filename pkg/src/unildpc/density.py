"""Quantized symmetric channel densities and their scalar functionals.

A binary-input symmetric-output channel is held in one of two views:

* ``SymmetricDensity``: the LLR density a(x) on a uniform grid centred at 0,
  plus point masses at -inf / +inf.
* ``ErrorProbDensity``: the density g(p) of P = min(Pr(X=0|Y), Pr(X=1|Y)),
  i.e. the channel as a mixture of BSCs.

Grids always carry an odd number of bins so that LLR 0 is a bin centre; erasures
need it.  All constructors place mass in magnitude/sign pairs, so a density built
here satisfies a(-x) = exp(-x) a(x) to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr

from .entropy import binary_entropy
from .errors import GridError, ParameterError, SymmetryError

MASS_TOL = 1e-12
SYMMETRY_TOL = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform LLR grid on [-half_range, half_range] with ``bins`` bins."""

    half_range: float = 30.0
    bins: int = 2047

    def __post_init__(self):
        if not self.half_range > 0:
            raise ParameterError("grid half_range must be positive")
        if self.bins < 3 or self.bins % 2 == 0:
            raise ParameterError("grid needs an odd number of bins >= 3 (LLR 0 must be a centre)")

    @property
    def step(self) -> float:
        return 2.0 * self.half_range / self.bins

    @property
    def half(self) -> int:
        """Index of the LLR-0 bin; magnitudes run over 0..half."""
        return self.bins // 2

    @cached_property
    def centers(self) -> np.ndarray:
        c = (np.arange(self.bins) - self.half) * self.step
        c.flags.writeable = False
        return c

    @cached_property
    def magnitudes(self) -> np.ndarray:
        m = np.arange(self.half + 1) * self.step
        m.flags.writeable = False
        return m

    @cached_property
    def magnitude_p(self) -> np.ndarray:
        """Error probability 1/(1+e^x) of each magnitude bin centre."""
        p = 0.5 * (1.0 - np.tanh(0.5 * self.magnitudes))
        p.flags.writeable = False
        return p

    @cached_property
    def magnitude_entropy(self) -> np.ndarray:
        h = binary_entropy(self.magnitude_p)
        h.flags.writeable = False
        return h

    @cached_property
    def positive_share(self) -> np.ndarray:
        """Fraction 1/(1+e^-x) of a magnitude bin's mass that sits at +x."""
        s = 0.5 * (1.0 + np.tanh(0.5 * self.magnitudes))
        s.flags.writeable = False
        return s


DEFAULT_GRID = Grid()


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True, eq=False)
class SymmetricDensity:
    """Quantized LLR density: per-bin masses plus saturation masses at -inf/+inf."""

    grid: Grid
    mass: np.ndarray
    mass_neg_inf: float = 0.0
    mass_pos_inf: float = 0.0

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float)
        if mass.shape != (self.grid.bins,):
            raise GridError(f"mass vector has shape {mass.shape}, grid wants ({self.grid.bins},)")
        if np.any(mass < 0) or self.mass_neg_inf < 0 or self.mass_pos_inf < 0:
            raise ParameterError("negative mass in density")
        total = mass.sum() + self.mass_neg_inf + self.mass_pos_inf
        if abs(total - 1.0) > MASS_TOL:
            raise ParameterError(f"density mass sums to {total!r}, not 1")
        mass.flags.writeable = False
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "mass_neg_inf", float(self.mass_neg_inf))
        object.__setattr__(self, "mass_pos_inf", float(self.mass_pos_inf))

    @classmethod
    def from_magnitudes(cls, grid: Grid, mag: np.ndarray, mass_pos_inf: float = 0.0) -> "SymmetricDensity":
        """Expand |LLR| masses into a symmetric density, renormalizing rounding drift."""
        mag = np.clip(np.asarray(mag, dtype=float), 0.0, None)
        mass_pos_inf = max(float(mass_pos_inf), 0.0)
        total = mag.sum() + mass_pos_inf
        if total <= 0:
            raise ParameterError("density has no mass")
        mag = mag / total
        mass_pos_inf /= total
        return cls(grid, _expand(grid, mag), 0.0, mass_pos_inf)

    def magnitudes(self) -> np.ndarray:
        """Mass of |M| per magnitude bin (the +inf mass is not included)."""
        return _fold(self.grid, self.mass)

    def __repr__(self):
        return (
            f"SymmetricDensity(L={self.grid.half_range}, N={self.grid.bins}, "
            f"P={error_prob(self):.4g}, B={bhattacharyya(self):.4g}, +inf={self.mass_pos_inf:.4g})"
        )


def _fold(grid: Grid, mass: np.ndarray) -> np.ndarray:
    k = grid.half
    mag = mass[k:].copy()
    mag[1:] += mass[k - 1 :: -1]
    return mag


def _expand(grid: Grid, mag: np.ndarray) -> np.ndarray:
    k = grid.half
    pos = mag * grid.positive_share
    out = np.empty(grid.bins)
    out[k:] = pos
    out[k] = mag[0]
    out[:k] = (mag[1:] - pos[1:])[::-1]
    return out


@dataclass(frozen=True, eq=False)
class ErrorProbDensity:
    """Discrete density of the error probability P on [0, 1/2]."""

    p: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).ravel()
        m = np.array(self.mass, dtype=float).ravel()
        if p.shape != m.shape or p.size == 0:
            raise ParameterError("error-probability density needs matching, nonempty p and mass")
        if np.any(p < 0) or np.any(p > 0.5):
            raise ParameterError("error probabilities must lie in [0, 1/2]")
        if np.any(np.diff(p) <= 0):
            raise ParameterError("error-probability points must be strictly increasing")
        if np.any(m < 0):
            raise ParameterError("negative mass in error-probability density")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ParameterError(f"error-probability masses sum to {m.sum()!r}, not 1")
        p.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "mass", m)

    @classmethod
    def from_points(cls, points, drop_zero=True, renormalize=False) -> "ErrorProbDensity":
        """Build from unsorted (p, mass) pairs, merging duplicate locations."""
        arr = np.asarray(list(points), dtype=float).reshape(-1, 2)
        p, m = arr[:, 0], arr[:, 1]
        uniq, inv = np.unique(p, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, m)
        if drop_zero:
            keep = merged > 0
            uniq, merged = uniq[keep], merged[keep]
        if renormalize:
            merged = merged / merged.sum()
        return cls(uniq, merged)

    @property
    def points(self):
        return list(zip(self.p.tolist(), self.mass.tolist()))

    def capacity(self) -> float:
        return float(1.0 - np.dot(binary_entropy(self.p), self.mass))

    def bhattacharyya(self) -> float:
        """Exact B of the BSC mixture: sum of m * 2 sqrt(p (1 - p))."""
        return float(np.dot(self.mass, 2.0 * np.sqrt(self.p * (1.0 - self.p))))

    def error_prob(self) -> float:
        return float(np.dot(self.mass, self.p))

    def total_variation(self, other: "ErrorProbDensity") -> float:
        """Half the L1 distance between the two point-mass vectors."""
        allp = np.union1d(self.p, other.p)
        a = np.zeros(allp.size)
        b = np.zeros(allp.size)
        a[np.searchsorted(allp, self.p)] = self.mass
        b[np.searchsorted(allp, other.p)] = other.mass
        return 0.5 * float(np.abs(a - b).sum())

    def to_json(self):
        return {"type": "gp", "points": [[float(p), float(m)] for p, m in self.points]}


# ---------------------------------------------------------------------------
# channel specifications


@dataclass(frozen=True)
class BSC:
    epsilon: float


@dataclass(frozen=True)
class BEC:
    e: float


@dataclass(frozen=True)
class BIAWGN:
    sigma: float


@dataclass(frozen=True)
class Explicit:
    density: ErrorProbDensity


@dataclass(frozen=True)
class Mix:
    parts: tuple = field(default_factory=tuple)  # ((gamma, spec), ...)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple((float(g), s) for g, s in self.parts))


ChannelSpec = Union[BSC, BEC, BIAWGN, Explicit, Mix]


def channel_to_json(spec: ChannelSpec) -> dict:
    if isinstance(spec, BSC):
        return {"type": "bsc", "epsilon": spec.epsilon}
    if isinstance(spec, BEC):
        return {"type": "bec", "e": spec.e}
    if isinstance(spec, BIAWGN):
        return {"type": "biawgn", "sigma": spec.sigma}
    if isinstance(spec, Explicit):
        return spec.density.to_json()
    if isinstance(spec, Mix):
        return {"type": "mix", "parts": [[g, channel_to_json(s)] for g, s in spec.parts]}
    raise ParameterError(f"unknown channel spec {spec!r}")


def channel_from_json(obj: dict) -> ChannelSpec:
    try:
        kind = obj["type"]
        if kind == "bsc":
            return BSC(float(obj["epsilon"]))
        if kind == "bec":
            return BEC(float(obj["e"]))
        if kind == "biawgn":
            return BIAWGN(float(obj["sigma"]))
        if kind == "gp":
            return Explicit(ErrorProbDensity.from_points(obj["points"], drop_zero=False))
        if kind == "mix":
            return Mix(tuple((float(g), channel_from_json(s)) for g, s in obj["parts"]))
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed channel JSON: {obj!r}") from exc
    raise ParameterError(f"unknown channel type {obj.get('type')!r}")


def validate_channel(spec: ChannelSpec) -> None:
    if isinstance(spec, BSC):
        if not 0.0 <= spec.epsilon <= 0.5:
            raise ParameterError(f"BSC crossover {spec.epsilon} outside [0, 1/2]")
    elif isinstance(spec, BEC):
        if not 0.0 <= spec.e <= 1.0:
            raise ParameterError(f"BEC erasure probability {spec.e} outside [0, 1]")
    elif isinstance(spec, BIAWGN):
        if not spec.sigma > 0:
            raise ParameterError(f"BIAWGN noise std-dev must be positive, got {spec.sigma}")
    elif isinstance(spec, Mix):
        if not spec.parts:
            raise ParameterError("empty mixture")
        gammas = np.array([g for g, _ in spec.parts])
        if np.any(gammas < 0) or abs(gammas.sum() - 1.0) > 1e-9:
            raise ParameterError(f"mixture weights must be nonnegative and sum to 1, got {gammas.tolist()}")
        for _, s in spec.parts:
            validate_channel(s)
    elif not isinstance(spec, Explicit):
        raise ParameterError(f"unknown channel spec {spec!r}")


# ---------------------------------------------------------------------------
# construction


def _place_bscs(grid: Grid, p: np.ndarray, m: np.ndarray):
    """Magnitude masses for a mixture of BSC(p_i) with weights m_i.

    Each BSC sits at |LLR| = log((1-p)/p); off-grid locations are split between
    the two neighbouring magnitude bins so that mass and entropy h(p)*mass are
    both kept, which keeps capacity exact.
    """
    p = np.asarray(p, dtype=float)
    m = np.asarray(m, dtype=float)
    mag = np.zeros(grid.half + 1)
    pos_inf = float(m[p <= 0].sum())
    live = p > 0
    p, m = p[live], m[live]
    if p.size == 0:
        return mag, pos_inf
    llr = np.log1p(-p) - np.log(p)
    hp = binary_entropy(p)
    H = grid.magnitude_entropy
    pos = llr / grid.step
    lo = np.floor(pos).astype(np.int64)
    beyond = lo >= grid.half
    # past the last centre: split between the last bin and +inf (h = 0 there)
    if np.any(beyond):
        w = hp[beyond] / H[grid.half]
        np.add.at(mag, np.full(w.size, grid.half), w * m[beyond])
        pos_inf += float(((1.0 - w) * m[beyond]).sum())
    inner = ~beyond
    lo, hp, m, pos = lo[inner], hp[inner], m[inner], pos[inner]
    exact = np.isclose(pos, lo, rtol=0, atol=1e-12)
    h_lo, h_hi = H[lo], H[lo + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        w_lo = np.where(exact, 1.0, (hp - h_hi) / (h_lo - h_hi))
    w_lo = np.clip(w_lo, 0.0, 1.0)
    np.add.at(mag, lo, w_lo * m)
    np.add.at(mag, lo + 1, (1.0 - w_lo) * m)
    return mag, pos_inf


def _gauss_interval(za, zb):
    """Standard normal mass of [za, zb], accurate in both tails."""
    upper = ndtr(-za) - ndtr(-zb)
    lower = ndtr(zb) - ndtr(za)
    return np.where(za >= 0, upper, lower)


def _biawgn_magnitudes(grid: Grid, sigma: float):
    mean = 2.0 / sigma**2
    sd = 2.0 / sigma
    step = grid.step
    edges = np.concatenate(([0.0], (np.arange(grid.half) + 0.5) * step, [grid.half_range]))
    a, b = edges[:-1], edges[1:]
    mag = _gauss_interval((a - mean) / sd, (b - mean) / sd) + _gauss_interval((-b - mean) / sd, (-a - mean) / sd)
    tail = float(ndtr(-(grid.half_range - mean) / sd) + ndtr((-grid.half_range - mean) / sd))
    return np.clip(mag, 0.0, None), tail


def make_density(spec: ChannelSpec, grid: Grid = DEFAULT_GRID) -> SymmetricDensity:
    """Quantize a channel onto ``grid``."""
    validate_channel(spec)
    if isinstance(spec, BSC):
        mag, inf = _place_bscs(grid, np.array([spec.epsilon]), np.array([1.0]))
        return SymmetricDensity.from_magnitudes(grid, mag, inf)
    if isinstance(spec, BEC):
        mag = np.zeros(grid.half + 1)
        mag[0] = spec.e
        return SymmetricDensity.from_magnitudes(grid, mag, 1.0 - spec.e)
    if isinstance(spec, BIAWGN):
        mag, tail = _biawgn_magnitudes(grid, spec.sigma)
        return SymmetricDensity.from_magnitudes(grid, mag, tail)
    if isinstance(spec, Explicit):
        return from_error_prob_density(spec.density, grid)
    return mix([(g, make_density(s, grid)) for g, s in spec.parts])


def from_error_prob_density(g: ErrorProbDensity, grid: Grid = DEFAULT_GRID) -> SymmetricDensity:
    """LLR view of a mixture of BSCs."""
    mag, inf = _place_bscs(grid, g.p, g.mass)
    return SymmetricDensity.from_magnitudes(grid, mag, inf)


def to_error_prob_density(a: SymmetricDensity, tol: float = SYMMETRY_TOL) -> ErrorProbDensity:
    """Map each magnitude bin x to p = 1/(1+e^x) carrying mass a(x) + a(-x)."""
    err = symmetry_error(a)
    if err > tol or a.mass_neg_inf > 0:
        raise SymmetryError(f"density is not symmetric (max deviation {err:.3g})")
    mag = a.magnitudes()
    p = np.concatenate(([0.0], a.grid.magnitude_p[::-1]))
    m = np.concatenate(([a.mass_pos_inf], mag[::-1]))
    keep = m > 0
    p, m = p[keep], m[keep]
    return ErrorProbDensity(p, m / m.sum())


def mix(parts: Sequence) -> SymmetricDensity:
    """Pointwise convex combination of densities sharing one grid."""
    parts = list(parts)
    if not parts:
        raise ParameterError("empty mixture")
    gammas = np.array([float(g) for g, _ in parts])
    if np.any(gammas < 0) or abs(gammas.sum() - 1.0) > 1e-9:
        raise ParameterError(f"mixture weights must be nonnegative and sum to 1, got {gammas.tolist()}")
    grid = parts[0][1].grid
    for _, a in parts:
        if a.grid != grid:
            raise GridError("cannot mix densities on different grids")
    gammas = gammas / gammas.sum()
    mass = sum(g * a.mass for g, (_, a) in zip(gammas, parts))
    neg = sum(g * a.mass_neg_inf for g, (_, a) in zip(gammas, parts))
    pos = sum(g * a.mass_pos_inf for g, (_, a) in zip(gammas, parts))
    total = mass.sum() + neg + pos
    return SymmetricDensity(grid, mass / total, neg / total, pos / total)


def delta(grid: Grid, where: float) -> SymmetricDensity:
    """Point mass at LLR 0 or +inf (the two point masses that are symmetric)."""
    mass = np.zeros(grid.bins)
    if where == 0:
        mass[grid.half] = 1.0
        return SymmetricDensity(grid, mass)
    if where == math.inf:
        return SymmetricDensity(grid, mass, 0.0, 1.0)
    raise ParameterError("only Delta_0 and Delta_inf are symmetric point masses")


# ---------------------------------------------------------------------------
# functionals


def _reject_neg_inf(a: SymmetricDensity):
    if a.mass_neg_inf > 0:
        raise SymmetryError("mass at -inf cannot belong to a symmetric density")


def capacity(a: SymmetricDensity) -> float:
    """Mutual information 1 - E[log2(1 + e^-M)] in bits."""
    _reject_neg_inf(a)
    x = a.grid.centers
    penalty = np.logaddexp(0.0, -x) / math.log(2.0)
    return float(1.0 - np.dot(a.mass, penalty))


def bhattacharyya(a: SymmetricDensity) -> float:
    """E[e^{-M/2}]; +inf mass contributes nothing."""
    _reject_neg_inf(a)
    return float(np.dot(a.mass, np.exp(-0.5 * a.grid.centers)))


def error_prob(a: SymmetricDensity) -> float:
    """Pr(M < 0) + Pr(M = 0)/2 written as the integral of a(x) e^{-(|x|+x)/2} / 2."""
    _reject_neg_inf(a)
    x = a.grid.centers
    return float(0.5 * np.dot(a.mass, np.exp(-0.5 * (np.abs(x) + x))))


def symmetry_error(a: SymmetricDensity) -> float:
    """Largest |a(-x) - e^{-x} a(x)| over positive bin centres."""
    k = a.grid.half
    pos = a.mass[k + 1 :]
    neg = a.mass[k - 1 :: -1]
    err = np.abs(neg - np.exp(-a.grid.magnitudes[1:]) * pos)
    return float(err.max(initial=0.0))


def check_symmetry(a: SymmetricDensity, tol: float = SYMMETRY_TOL) -> bool:
    return a.mass_neg_inf == 0 and symmetry_error(a) <= tol
