"""Edge-perspective degree distributions and the published reference codes."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# Published coefficients are printed to four decimals and do not sum to 1
# exactly; accept that much slack and normalize where a true distribution is
# needed.
SUM_TOL = 1e-3


def _clean(pairs, side):
    out = {}
    for deg, frac in pairs:
        deg, frac = int(deg), float(frac)
        if deg < 2:
            raise ParameterError(f"{side} degree {deg} < 2")
        if frac < 0:
            raise ParameterError(f"negative {side} fraction for degree {deg}")
        if frac > 0:
            out[deg] = out.get(deg, 0.0) + frac
    if not out:
        raise ParameterError(f"{side} distribution is empty")
    total = sum(out.values())
    if abs(total - 1.0) > SUM_TOL:
        raise ParameterError(f"{side} fractions sum to {total}, not 1")
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class DegreeDistribution:
    """Pair (lambda, rho) of edge-perspective degree fractions, e.g. ((2, 0.3), (3, 0.7))."""

    lam: tuple
    rho: tuple

    def __post_init__(self):
        object.__setattr__(self, "lam", _clean(self.lam, "variable"))
        object.__setattr__(self, "rho", _clean(self.rho, "check"))
        rate = design_rate(self)
        if not 0.0 < rate < 1.0:
            raise ParameterError(f"design rate {rate:.4f} outside (0, 1)")

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls(((dv, 1.0),), ((dc, 1.0),))

    @property
    def max_var_degree(self) -> int:
        return self.lam[-1][0]

    @property
    def lambda2(self) -> float:
        """lambda'(0), the degree-2 fraction."""
        return dict(self.lam).get(2, 0.0)

    @property
    def rho_prime_1(self) -> float:
        return sum(f * (k - 1) for k, f in self.rho)

    def normalized(self) -> "DegreeDistribution":
        ls = sum(f for _, f in self.lam)
        rs = sum(f for _, f in self.rho)
        if ls == 1.0 and rs == 1.0:
            return self
        return DegreeDistribution(tuple((d, f / ls) for d, f in self.lam), tuple((d, f / rs) for d, f in self.rho))

    def lambda_poly(self, x):
        return sum(f * np.power(x, d - 1) for d, f in self.lam)

    def rho_poly(self, x):
        return sum(f * np.power(x, d - 1) for d, f in self.rho)

    def to_json(self) -> dict:
        return {"lambda": [[d, f] for d, f in self.lam], "rho": [[d, f] for d, f in self.rho]}

    @classmethod
    def from_json(cls, obj) -> "DegreeDistribution":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(tuple(map(tuple, obj["lambda"])), tuple(map(tuple, obj["rho"])))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"malformed degree distribution: {obj!r}") from exc

    def __str__(self):
        lam = " + ".join(f"{f:.4f}x^{d - 1}" for d, f in self.lam)
        rho = " + ".join(f"{f:.4f}x^{d - 1}" for d, f in self.rho)
        return f"lambda(x) = {lam}; rho(x) = {rho}"


def design_rate(dd: DegreeDistribution) -> float:
    """1 - (sum rho_k / k) / (sum lambda_i / i)."""
    lam_int = sum(f / d for d, f in dd.lam)
    if lam_int <= 0:
        raise ParameterError("sum of lambda_i / i is zero")
    return 1.0 - sum(f / k for k, f in dd.rho) / lam_int


# Rate-0.6 codes used for comparison: one optimized for the AWGN channel
# (maximum variable degree 100) and one designed over the equal-capacity basis
# (maximum variable degree 50).  Coefficients exactly as printed.
AWGN_CODE = DegreeDistribution(
    lam=(
        (2, 0.1499), (3, 0.1621), (6, 0.0224), (7, 0.1764), (8, 0.0077), (17, 0.1166),
        (28, 0.0307), (29, 0.0319), (31, 0.0438), (32, 0.0278), (43, 0.0048), (100, 0.2258),
    ),
    rho=((13, 0.5), (14, 0.5)),
)

UNIVERSAL_CODE = DegreeDistribution(
    lam=((2, 0.1689), (3, 0.1924), (6, 0.0604), (7, 0.2069), (11, 0.0763), (30, 0.0457), (50, 0.2495)),
    rho=((12, 0.5806), (13, 0.4194)),
)

REFERENCE_CODES = {"awgn": AWGN_CODE, "universal": UNIVERSAL_CODE, "regular36": DegreeDistribution.regular(3, 6)}
