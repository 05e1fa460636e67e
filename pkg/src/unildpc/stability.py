"""Stability of the perfect-decoding fixed point and the Bhattacharyya recursion bound."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .density import SymmetricDensity, bhattacharyya
from .ensemble import DegreeDistribution
from .errors import ParameterError

# P(a_l) at or below this counts as "close to perfect decoding" for the empirical
# descent check; the proof only asserts that some such level exists.
DESCENT_LEVEL = 1e-4


@dataclass(frozen=True)
class StabilityReport:
    b_value: float
    lambda2: float
    rho_prime_1: float
    product: float
    stable: bool
    margin: float

    def to_json(self) -> dict:
        return asdict(self)


def _report(b_value: float, dd: DegreeDistribution) -> StabilityReport:
    lam2 = dd.lambda2
    rp = dd.rho_prime_1
    product = b_value * lam2 * rp
    # equality is unstable: the condition is strict
    return StabilityReport(b_value, lam2, rp, product, product < 1.0, 1.0 - product)


def stability_check(a0: SymmetricDensity, dd: DegreeDistribution) -> StabilityReport:
    """B(a0) * lambda'(0) * rho'(1) against 1."""
    return _report(bhattacharyya(a0), dd)


def hull_stability(endpoints, dd: DegreeDistribution) -> StabilityReport:
    """Worst-case stability over the convex hull of ``endpoints``.

    B is linear in the density, so its maximum over the hull sits at an
    endpoint and that endpoint's report certifies the whole hull.
    """
    endpoints = list(endpoints)
    if not endpoints:
        raise ParameterError("hull_stability needs at least one endpoint")
    worst = max(bhattacharyya(a) for a in endpoints)
    return _report(worst, dd)


def bec_bound_trajectory(a0: SymmetricDensity, dd: DegreeDistribution, iters: int):
    """t_l = B(a0) lambda(1 - rho(1 - t_{l-1})) from t_0 = B(a0).

    Upper-bounds B along density evolution and equals it on the BEC.
    """
    b0 = bhattacharyya(a0)
    return b_recursion(b0, dd, iters)


def b_recursion(b0: float, dd: DegreeDistribution, iters: int):
    dd = dd.normalized()
    t = b0
    out = []
    for _ in range(iters):
        t = b0 * float(dd.lambda_poly(1.0 - dd.rho_poly(1.0 - t)))
        out.append(t)
    return out
