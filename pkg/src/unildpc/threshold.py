"""Universal threshold search over equal-capacity basis sets and empirical checks
that convergence on the basis extends to arbitrary channels of that capacity."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .decomposition import LEVELS_6BIT, BasisSet, default_levels, make_basis, sample_channel
from .density import ErrorProbDensity, Grid, bhattacharyya, from_error_prob_density
from .ensemble import DegreeDistribution, design_rate
from .errors import MisuseError, ParameterError, ThresholdNotFoundError
from .evolution import DEFAULT_MAX_ITER, DEFAULT_TARGET, converges, converges_all
from .stability import StabilityReport, hull_stability

# Thresholds at 1023 and 2047 bins (L = 30) agree to four digits for the
# reference codes, so searches run on the cheaper grid.
SEARCH_GRID = Grid(30.0, 1023)
LEVELS_7BIT = 127
CAPACITY_CEILING = 1.0 - 1e-3
GAMMAS = tuple(np.round(np.arange(1, 10) / 10.0, 1))


def basis_densities(basis: BasisSet, grid: Grid = SEARCH_GRID):
    return [from_error_prob_density(ch.density(), grid) for ch in basis.channels]


def _coords(basis: BasisSet):
    """Basis channels in normalized (x / xi, (y - xi) / (1/2 - xi)) coordinates."""
    ch = basis.channels
    x = np.array([c.x for c in ch]) / basis.xi
    y = (np.array([c.y for c in ch]) - basis.xi) / (0.5 - basis.xi)
    return np.column_stack((x, y))


class _Hardness:
    """Remembers per-channel effort from earlier probes so the next probe tries
    the likely failures first and exits early."""

    def __init__(self):
        self.tree = None
        self.score = None

    def order(self, basis: BasisSet):
        if self.tree is None:
            return np.arange(len(basis))
        _, idx = self.tree.query(_coords(basis))
        # stable sort on descending score keeps ties in basis order
        return np.argsort(-self.score[idx], kind="stable")

    def update(self, basis: BasisSet, order, reports):
        pts = _coords(basis)
        prev = None
        if self.tree is not None:
            prev = self.score[self.tree.query(pts)[1]]
        score = np.zeros(len(basis)) if prev is None else prev.copy()
        for i, rep in zip(order, reports):
            if rep is not None:
                score[i] = np.inf if not rep.converged else rep.iterations_used
        self.tree, self.score = cKDTree(pts), score


@dataclass
class Probe:
    capacity: float
    converged: bool
    reason: str
    shape: tuple
    stability: StabilityReport
    channels_run: int
    failing_channel: list | None = None  # [x, y, alpha]

    def to_json(self) -> dict:
        return {
            "capacity": self.capacity,
            "converged": self.converged,
            "reason": self.reason,
            "shape": list(self.shape),
            "stability": self.stability.to_json(),
            "channels_run": self.channels_run,
            "failing_channel": self.failing_channel,
        }


def probe_capacity(dd: DegreeDistribution, capacity: float, n_points: int = LEVELS_6BIT, grid: Grid = SEARCH_GRID,
                   max_iter: int = DEFAULT_MAX_ITER, target: float = DEFAULT_TARGET, placement: str = "p",
                   hardness: _Hardness | None = None, workers: int | None = None) -> Probe:
    """Does ``dd`` converge on every channel of the basis at ``capacity``?

    The stability condition over the basis hull is checked first.  It is
    necessary for convergence, and finite-grid DE can otherwise reach a small
    target on a barely unstable channel before the instability shows.
    """
    basis = make_basis(capacity, *default_levels(capacity, n_points), placement=placement)
    dens = basis_densities(basis, grid)
    stab = hull_stability(dens, dd)
    channels = basis.channels
    if not stab.stable:
        j = int(np.argmax([bhattacharyya(d) for d in dens]))
        c = channels[j]
        return Probe(capacity, False, "unstable", basis.shape, stab, 0, [c.x, c.y, c.alpha])
    hardness = hardness or _Hardness()
    order = hardness.order(basis)
    reports = converges_all([dens[i] for i in order], dd, max_iter, target, workers=workers, stop_on_failure=True)
    hardness.update(basis, order, reports)
    run = sum(r is not None for r in reports)
    for i, rep in zip(order, reports):
        if rep is not None and not rep.converged:
            c = channels[i]
            return Probe(capacity, False, rep.reason, basis.shape, stab, run, [c.x, c.y, c.alpha])
    return Probe(capacity, True, "target", basis.shape, stab, run)


@dataclass
class ThresholdResult:
    c_u_star: float
    bracket: tuple
    evaluations: list = field(default_factory=list)  # (capacity, all_converged)
    monotone: bool = True
    violations: list = field(default_factory=list)
    stability_at_high: StabilityReport | None = None
    stability_consistent: bool = True
    resolution: int = LEVELS_6BIT
    refined: bool = False
    probes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "c_u_star": self.c_u_star,
            "bracket": list(self.bracket),
            "evaluations": [[c, ok] for c, ok in self.evaluations],
            "monotone": self.monotone,
            "violations": self.violations,
            "stability_at_high": self.stability_at_high.to_json() if self.stability_at_high else None,
            "stability_consistent": self.stability_consistent,
            "resolution": self.resolution,
            "refined": self.refined,
            "probes": [p.to_json() for p in self.probes],
        }

    def evaluations_csv(self, meta=None) -> str:
        buf = io.StringIO()
        for line in meta or ():
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["capacity", "converged"])
        for c, ok in sorted(self.evaluations):
            w.writerow([repr(c), int(ok)])
        return buf.getvalue()


def _monotone(evaluations):
    """Capacities where a failure sits above a success (sorted by capacity)."""
    ev = sorted(evaluations)
    bad = []
    for k, (c, ok) in enumerate(ev):
        if not ok and any(ok2 for _, ok2 in ev[:k]):
            bad.append(c)
    return bad


def universal_threshold(dd: DegreeDistribution, basis_resolution: int = LEVELS_6BIT, tol: float = 0.01,
                        grid: Grid = SEARCH_GRID, max_iter: int = DEFAULT_MAX_ITER, target: float = DEFAULT_TARGET,
                        refine: bool = False, extra_probes: int = 3, placement: str = "p",
                        workers: int | None = None, log=None) -> ThresholdResult:
    """Bisect capacity over (design rate, 1) for the smallest C at which ``dd``
    converges on every channel of the basis G(C)."""
    if tol < 1e-4:
        raise ParameterError("tol must be at least 1e-4")
    hardness = _Hardness()
    probes = []

    def run(c, n=basis_resolution):
        p = probe_capacity(dd, c, n, grid, max_iter, target, placement, hardness, workers)
        probes.append(p)
        if log:
            log(f"C={c:.6f} n={n} converged={p.converged} reason={p.reason} run={p.channels_run}")
        return p.converged

    lo, hi = design_rate(dd), CAPACITY_CEILING
    if not run(hi):
        raise ThresholdNotFoundError(f"no convergence on the basis even at capacity {hi}")
    if run(lo):
        # converging at capacity equal to the rate: nothing below to search
        hi = lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if run(mid):
            hi = mid
        else:
            lo = mid
    refined = False
    if refine:
        refined = True
        hardness = _Hardness()
        steps = 0
        while not run(hi, LEVELS_7BIT):
            lo, hi = hi, min(hi + tol, CAPACITY_CEILING)
            steps += 1
            if steps > 10 or lo >= CAPACITY_CEILING:
                raise ThresholdNotFoundError("7-bit refinement did not converge near the 6-bit bracket")
    # spot checks inside the accepted region
    for k in range(1, extra_probes + 1):
        c = hi + k * tol
        if c < CAPACITY_CEILING:
            run(c)
    evaluations = [(p.capacity, p.converged) for p in probes]
    violations = _monotone(evaluations)
    check_c = min(hi + tol, CAPACITY_CEILING)
    basis = make_basis(check_c, *default_levels(check_c, basis_resolution), placement=placement)
    stab = hull_stability(basis_densities(basis, grid), dd)
    return ThresholdResult(
        c_u_star=hi,
        bracket=(lo, hi),
        evaluations=evaluations,
        monotone=not violations,
        violations=violations,
        stability_at_high=stab,
        stability_consistent=stab.stable,
        resolution=LEVELS_7BIT if refined else basis_resolution,
        refined=refined,
        probes=probes,
    )


# ---------------------------------------------------------------------------


@dataclass
class ConjectureReport:
    capacity: float
    n_channels: int
    n_pairs: int
    tested: int = 0
    counterexamples: list = field(default_factory=list)
    skipped_pairs: int = 0

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "capacity": self.capacity,
            "n_channels": self.n_channels,
            "n_pairs": self.n_pairs,
            "tested": self.tested,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
            "skipped_pairs": self.skipped_pairs,
        }


def _mix_g(gamma, g1: ErrorProbDensity, g2: ErrorProbDensity) -> ErrorProbDensity:
    pts = [(p, gamma * m) for p, m in g1.points] + [(p, (1.0 - gamma) * m) for p, m in g2.points]
    return ErrorProbDensity.from_points(pts)


def validate_conjecture(dd: DegreeDistribution, capacity: float, n_channels: int, n_mix_points: int, seed=None,
                        basis_resolution: int = LEVELS_6BIT, grid: Grid = SEARCH_GRID,
                        max_iter: int = DEFAULT_MAX_ITER, target: float = DEFAULT_TARGET,
                        gammas=GAMMAS, check_basis: bool = True, log=None) -> ConjectureReport:
    """Run DE on random channels of capacity C and on mixtures of random pairs.

    ``n_mix_points`` counts endpoint pairs; each pair is mixed at every value in
    ``gammas``.  A pair whose endpoints do not both converge is skipped (the
    endpoint failure itself is recorded).  Non-convergent channels are reported
    as counterexamples with their full description.
    """
    basis = make_basis(capacity, *default_levels(capacity, basis_resolution))
    report = ConjectureReport(capacity, n_channels, n_mix_points)
    if check_basis and (n_channels or n_mix_points):
        pr = probe_capacity(dd, capacity, basis_resolution, grid, max_iter, target)
        if not pr.converged:
            raise MisuseError(f"code does not converge on the basis at capacity {capacity}", pr.to_json())
    rng = np.random.default_rng(seed)

    def test(g, kind, extra=None):
        rep = converges(from_error_prob_density(g, grid), dd, max_iter, target)
        report.tested += 1
        if not rep.converged:
            item = {"kind": kind, "channel": g.to_json(), "reason": rep.reason,
                    "iterations": rep.iterations_used, "final_error_prob": rep.final_error_prob}
            item.update(extra or {})
            report.counterexamples.append(item)
            if log:
                log(f"counterexample: {item}")
        return rep.converged

    for k in range(n_channels):
        test(sample_channel(capacity, basis, rng), "random", {"index": k})
    for k in range(n_mix_points):
        g1 = sample_channel(capacity, basis, rng)
        g2 = sample_channel(capacity, basis, rng)
        if not (test(g1, "endpoint", {"pair": k}) & test(g2, "endpoint", {"pair": k})):
            report.skipped_pairs += 1
            continue
        for gamma in gammas:
            test(_mix_g(float(gamma), g1, g2), "mixture", {"pair": k, "gamma": float(gamma)})
    return report
