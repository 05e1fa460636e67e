"""Equal-capacity basis channels and nonnegative decomposition onto them.

Every basis channel is a two-point error-probability density
``alpha * Delta_x + (1 - alpha) * Delta_y`` with ``x <= xi <= y`` where
``xi = h^-1(1 - C)``, and ``alpha`` is fixed by requiring capacity ``C``.
Any channel of capacity ``C`` whose mass points sit on the basis grid is a
convex combination of these plus a point mass at ``xi``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .density import ErrorProbDensity
from .entropy import binary_entropy, binary_entropy_inverse
from .errors import CapacityError, DegenerateCapacityError, GridError, ParameterError

__all__ = [
    "BasisChannel",
    "BasisSet",
    "DecompositionWeights",
    "binary_entropy",
    "binary_entropy_inverse",
    "basis_alpha",
    "default_levels",
    "make_basis",
    "snap",
    "snap_to_points",
    "decompose",
    "recompose",
    "sample_channel",
]

CAPACITY_TOL = 1e-9
POINT_TOL = 1e-12
LEVELS_6BIT = 63  # left + right points; xi is the 64th
LLR_SPAN = 15.0  # |LLR| of the innermost nonzero left point for LLR-uniform placement


def basis_alpha(x, y, capacity):
    """Weight on the left point that gives ``alpha h(x) + (1-alpha) h(y) = 1 - C``."""
    H = 1.0 - capacity
    hx, hy = binary_entropy(x), binary_entropy(y)
    return (hy - H) / (hy - hx)


@dataclass(frozen=True)
class BasisChannel:
    x: float
    y: float
    alpha: float
    capacity: float

    def density(self) -> ErrorProbDensity:
        return ErrorProbDensity.from_points([(self.x, self.alpha), (self.y, 1.0 - self.alpha)])


@dataclass(frozen=True, eq=False)
class BasisSet:
    capacity: float
    xi: float
    left_points: np.ndarray
    right_points: np.ndarray

    def __post_init__(self):
        left = np.array(self.left_points, dtype=float)
        right = np.array(self.right_points, dtype=float)
        left.flags.writeable = False
        right.flags.writeable = False
        object.__setattr__(self, "left_points", left)
        object.__setattr__(self, "right_points", right)

    @cached_property
    def alphas(self) -> np.ndarray:
        """alpha(x_i, y_j) as an (N_left, N_right) array."""
        H = 1.0 - self.capacity
        hx = binary_entropy(self.left_points)[:, None]
        hy = binary_entropy(self.right_points)[None, :]
        a = (hy - H) / (hy - hx)
        a.flags.writeable = False
        return a

    @property
    def shape(self):
        return self.left_points.size, self.right_points.size

    def __len__(self):
        return self.left_points.size * self.right_points.size

    @property
    def channels(self):
        """Basis channels in row-major (left, right) order."""
        a = self.alphas
        return [
            BasisChannel(float(x), float(y), float(a[i, j]), self.capacity)
            for i, x in enumerate(self.left_points)
            for j, y in enumerate(self.right_points)
        ]

    @property
    def grid_points(self) -> np.ndarray:
        return np.concatenate((self.left_points, [self.xi], self.right_points))

    def to_json(self) -> dict:
        return {
            "capacity": self.capacity,
            "xi": self.xi,
            "left_points": self.left_points.tolist(),
            "right_points": self.right_points.tolist(),
            "channels": [[c.x, c.y, c.alpha] for c in self.channels],
        }

    @classmethod
    def from_json(cls, obj) -> "BasisSet":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(float(obj["capacity"]), float(obj["xi"]), obj["left_points"], obj["right_points"])


@dataclass(frozen=True, eq=False)
class DecompositionWeights:
    """Weight per basis channel, shaped like ``BasisSet.alphas``, plus mass pinned at xi."""

    weights: np.ndarray
    xi_mass: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if np.any(w < 0) or self.xi_mass < 0:
            raise ParameterError("decomposition weights must be nonnegative")
        if abs(w.sum() + self.xi_mass - 1.0) > 1e-12:
            raise ParameterError(f"decomposition weights sum to {w.sum() + self.xi_mass!r}, not 1")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "xi_mass", float(self.xi_mass))

    def to_json(self, basis: BasisSet) -> dict:
        trip = [
            [float(basis.left_points[i]), float(basis.right_points[j]), float(self.weights[i, j])]
            for i, j in zip(*np.nonzero(self.weights))
        ]
        return {"capacity": basis.capacity, "xi": basis.xi, "xi_mass": self.xi_mass, "weights": trip}

    @classmethod
    def from_json(cls, obj, basis: BasisSet) -> "DecompositionWeights":
        w = np.zeros(basis.shape)
        li = {float(x): i for i, x in enumerate(basis.left_points)}
        ri = {float(y): j for j, y in enumerate(basis.right_points)}
        for x, y, v in obj["weights"]:
            w[li[float(x)], ri[float(y)]] = v
        return cls(w, obj.get("xi_mass", 0.0))


def default_levels(capacity: float, total: int = LEVELS_6BIT):
    """Split ``total`` points between [0, xi) and (xi, 1/2] in proportion to their lengths."""
    xi = binary_entropy_inverse(1.0 - capacity)
    n_left = int(round(total * xi / 0.5))
    n_left = min(max(n_left, 1), total - 1)
    return n_left, total - n_left


def _check_capacity(capacity):
    capacity = float(capacity)
    if capacity <= 0.0 or capacity >= 1.0:
        raise DegenerateCapacityError(f"capacity must lie strictly inside (0, 1), got {capacity}")
    return capacity


def make_basis(capacity: float, n_left: int | None = None, n_right: int | None = None,
               placement: str = "p") -> BasisSet:
    """Basis G(C) on N_left points in [0, xi) and N_right points in (xi, 1/2].

    ``placement="p"`` spaces points uniformly in error probability (left grid
    starts at 0, right grid ends at 1/2).  ``placement="llr"`` spaces them
    uniformly in |LLR| instead, with x = 0 kept as the perfect-channel point.
    """
    capacity = _check_capacity(capacity)
    if n_left is None or n_right is None:
        dl, dr = default_levels(capacity)
        n_left = dl if n_left is None else n_left
        n_right = dr if n_right is None else n_right
    if n_left < 1 or n_right < 1:
        raise ParameterError("basis needs at least one point on each side of xi")
    xi = binary_entropy_inverse(1.0 - capacity)
    if placement == "p":
        left = xi * np.arange(n_left) / n_left
        right = xi + (0.5 - xi) * np.arange(1, n_right + 1) / n_right
    elif placement == "llr":
        v_xi = np.log((1.0 - xi) / xi)
        v_left = v_xi + (LLR_SPAN - v_xi) * np.arange(n_left - 1, 0, -1) / n_left
        left = np.concatenate(([0.0], 1.0 / (1.0 + np.exp(v_left)))) if n_left > 1 else np.array([0.0])
        v_right = v_xi * (1.0 - np.arange(1, n_right + 1) / n_right)
        right = 1.0 / (1.0 + np.exp(v_right))
    else:
        raise ParameterError(f"unknown basis placement {placement!r}")
    return BasisSet(capacity, xi, left, right)


def snap_to_points(g: ErrorProbDensity, grid: np.ndarray) -> ErrorProbDensity:
    """Move every mass of ``g`` onto the sorted points ``grid`` (which must span
    the support of ``g``), splitting off-grid masses between neighbours so that
    mass and h(p)*mass are both preserved."""
    grid = np.asarray(grid, dtype=float)
    if g.p[0] < grid[0] - POINT_TOL or g.p[-1] > grid[-1] + POINT_TOL:
        raise GridError("grid does not cover the channel's error probabilities")
    hg = binary_entropy(grid)
    idx = np.searchsorted(grid, g.p)
    pts = []
    for p, m, k in zip(g.p, g.mass, idx):
        if k < grid.size and abs(grid[k] - p) <= POINT_TOL:
            pts.append((grid[k], m))
        elif k > 0 and abs(grid[k - 1] - p) <= POINT_TOL:
            pts.append((grid[k - 1], m))
        else:
            lo, hi = grid[k - 1], grid[k]
            w = (hg[k] - binary_entropy(p)) / (hg[k] - hg[k - 1])
            pts.append((lo, w * m))
            pts.append((hi, (1.0 - w) * m))
    return ErrorProbDensity.from_points(pts)


def snap(g: ErrorProbDensity, basis: BasisSet) -> ErrorProbDensity:
    """Project ``g`` onto the basis grid (left points, xi, right points), keeping capacity exact."""
    return snap_to_points(g, basis.grid_points)


def _locate(values, points):
    """Index of each value in ``points`` (within POINT_TOL), or -1."""
    idx = np.searchsorted(points, values)
    out = np.full(values.size, -1)
    for side in (idx, idx - 1):
        ok = (side >= 0) & (side < points.size)
        near = ok & (np.abs(points[np.clip(side, 0, points.size - 1)] - values) <= POINT_TOL)
        out = np.where((out < 0) & near, side, out)
    return out


def decompose(g: ErrorProbDensity, basis: BasisSet) -> DecompositionWeights:
    """Nonnegative weights over ``basis`` (plus mass at xi) that rebuild ``g`` exactly.

    Solved as a transportation problem: every basis channel moves equal
    entropy deficit out of its left point and excess out of its right point, so
    a greedy pairing that exhausts one point per step always balances.
    """
    if abs(g.capacity() - basis.capacity) > CAPACITY_TOL:
        raise CapacityError(f"channel capacity {g.capacity():.12f} != basis capacity {basis.capacity:.12f}")
    is_xi = np.abs(g.p - basis.xi) <= POINT_TOL
    li = _locate(g.p, basis.left_points)
    ri = _locate(g.p, basis.right_points)
    off = ~is_xi & (li < 0) & (ri < 0)
    if np.any(off):
        raise GridError(f"mass points {g.p[off].tolist()} are not on the basis grid; snap() first")
    delta = float(g.mass[is_xi].sum())
    left_res = np.zeros(basis.left_points.size)
    right_res = np.zeros(basis.right_points.size)
    np.add.at(left_res, li[li >= 0], g.mass[li >= 0])
    np.add.at(right_res, ri[(ri >= 0) & ~is_xi], g.mass[(ri >= 0) & ~is_xi])
    alphas = basis.alphas
    w = np.zeros(basis.shape)
    order_l = [i for i in range(left_res.size) if left_res[i] > 0]
    order_r = [j for j in range(right_res.size - 1, -1, -1) if right_res[j] > 0]
    a = b = 0
    while a < len(order_l) and b < len(order_r):
        i, j = order_l[a], order_r[b]
        al = alphas[i, j]
        take = min(left_res[i] / al, right_res[j] / (1.0 - al))
        w[i, j] += take
        left_res[i] -= take * al
        right_res[j] -= take * (1.0 - al)
        # exhaust whichever side ran out (relative to its start, so rounding cannot stall)
        if left_res[i] <= right_res[j] * al / (1.0 - al):
            left_res[i] = 0.0
            a += 1
        else:
            right_res[j] = 0.0
            b += 1
    w = np.clip(w, 0.0, None)
    total = w.sum() + delta
    return DecompositionWeights(w / total, delta / total)


def recompose(weights: DecompositionWeights, basis: BasisSet) -> ErrorProbDensity:
    """delta * Delta_xi + sum_{x,y} w_{x,y} g_{x,y}."""
    w = weights.weights
    a = basis.alphas
    left = (w * a).sum(axis=1)
    right = (w * (1.0 - a)).sum(axis=0)
    pts = list(zip(basis.left_points, left)) + list(zip(basis.right_points, right))
    pts.append((basis.xi, weights.xi_mass))
    return ErrorProbDensity.from_points(pts)


def sample_channel(capacity: float, basis: BasisSet, seed=None, max_components: int = 8) -> ErrorProbDensity:
    """Random channel of capacity C: Dirichlet weights on a random subset of basis channels.

    The subset (size 1..max_components, drawn from the basis channels and, for
    bases with more than one channel, the BSC at xi) keeps samples spread out;
    a flat Dirichlet over hundreds of channels would always land near the
    centroid.
    """
    if abs(capacity - basis.capacity) > CAPACITY_TOL:
        raise CapacityError(f"requested capacity {capacity} != basis capacity {basis.capacity}")
    rng = np.random.default_rng(seed)
    n = len(basis)
    pool = n + 1 if n > 1 else n  # slot n is the BSC(xi) point mass
    r = int(rng.integers(1, min(max_components, pool) + 1))
    pick = rng.choice(pool, size=r, replace=False)
    mix = rng.dirichlet(np.ones(r))
    w = np.zeros(n + 1)
    w[pick] = mix
    xi_mass = w[n] if pool > n else 0.0
    return recompose(DecompositionWeights(w[:n].reshape(basis.shape), xi_mass), basis)
