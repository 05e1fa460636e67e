"""Rate-maximizing variable-degree optimization by iterated linear programs.

With rho and the check-node output densities b_l of an incumbent code held
fixed, the variable-node output error probability is linear in lambda:

    P_out(lambda) = sum_i lambda_i * P(a0 conv b_l^{conv (i-1)}).

Each round maximizes sum_i lambda_i / i subject to a per-iteration descent
constraint for every channel, then re-verifies the candidate with full density
evolution before accepting it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .density import SymmetricDensity, bhattacharyya, capacity
from .ensemble import DegreeDistribution, design_rate
from .errors import DesignInfeasibleError, ParameterError
from .evolution import (
    DEFAULT_MAX_ITER,
    DEFAULT_TARGET,
    _as_full,
    _as_mag,
    _check_mixture,
    _mag_functionals,
    _step,
    _to_full,
    _vconv,
    converges_all,
    grid_ops,
)

__all__ = ["DesignProblem", "DesignResult", "design_rate", "optimize_lambda", "sweep_rho", "seed_code", "rho_family"]

CAPACITY_MATCH = 1e-6
# drop lambda coefficients below this after each LP
COEF_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class DesignProblem:
    channels: tuple
    max_var_degree: int
    rho: tuple | None = None  # ((k, frac), (k + 1, 1 - frac))
    stability_cap: bool = True
    target: float = DEFAULT_TARGET
    max_iter: int = DEFAULT_MAX_ITER
    margin: float = 0.01  # descent margin theta
    tracked: int = 25
    max_rounds: int = 50
    min_improvement: float = 1e-4
    trust_region: float = 0.1

    def __post_init__(self):
        chans = tuple(self.channels)
        if not chans:
            raise ParameterError("design needs at least one channel")
        for a in chans:
            if not isinstance(a, SymmetricDensity):
                raise ParameterError("design channels must be SymmetricDensity objects")
        caps = [capacity(a) for a in chans]
        if max(caps) - min(caps) > CAPACITY_MATCH:
            raise ParameterError(f"channel capacities differ: {min(caps):.6f} .. {max(caps):.6f}")
        if self.max_var_degree < 3:
            raise DesignInfeasibleError(
                f"max variable degree {self.max_var_degree} < 3 leaves no code to optimize",
                {"max_var_degree": self.max_var_degree},
            )
        object.__setattr__(self, "channels", chans)
        if self.rho is not None:
            object.__setattr__(self, "rho", tuple((int(k), float(f)) for k, f in self.rho if f > 0))

    def with_rho(self, rho) -> "DesignProblem":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields["rho"] = rho
        return DesignProblem(**fields)

    @property
    def b_max(self) -> float:
        return max(bhattacharyya(a) for a in self.channels)


@dataclass
class DesignResult:
    dd: DegreeDistribution
    rate: float
    per_channel_reports: list
    lp_iterations: int
    rate_history: list = field(default_factory=list)
    constraint_counts: list = field(default_factory=list)  # (channels, rows) per LP
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "dd": self.dd.to_json(),
            "rate": self.rate,
            "converged": [bool(r.converged) for r in self.per_channel_reports],
            "iterations": [int(r.iterations_used) for r in self.per_channel_reports],
            "lp_iterations": self.lp_iterations,
            "rate_history": self.rate_history,
            "constraint_counts": [list(c) for c in self.constraint_counts],
            "degenerate": self.degenerate,
        }


def rho_family(k: int, frac: float):
    """frac * x^(k-1) + (1 - frac) * x^k."""
    if frac >= 1.0:
        return ((k, 1.0),)
    return ((k, frac), (k + 1, 1.0 - frac))


def _all_converge(problem, dd, order=None):
    chans = list(problem.channels)
    if order is not None:
        chans = [chans[i] for i in order]
    reps = converges_all(chans, dd, problem.max_iter, problem.target, stop_on_failure=True)
    ok = all(r is not None and r.converged for r in reps)
    if order is not None:
        back = [None] * len(reps)
        for i, r in zip(order, reps):
            back[i] = r
        reps = back
    return ok, reps


def seed_code(problem: DesignProblem):
    """First regular-variable code (degrees 3, 4, ...) with the problem's rho that
    converges on every channel."""
    tried = []
    for d in range(3, min(problem.max_var_degree, 8) + 1):
        try:
            dd = DegreeDistribution(((d, 1.0),), problem.rho)
        except ParameterError:
            continue
        ok, reps = _all_converge(problem, dd)
        tried.append(d)
        if ok:
            return dd, reps
    raise DesignInfeasibleError(
        "no regular seed converges on every channel",
        {"rho": problem.rho, "tried_var_degrees": tried},
    )


def _p_full(ops, full) -> float:
    k = ops.grid.half
    f = full.f
    tot = f.sum() + full.inf
    return float((f[:k].sum() + 0.5 * f[k]) / tot)


def _tracked(n_iter: int, count: int):
    """Up to ``count`` geometrically spaced iteration indices in [0, n_iter)."""
    if n_iter <= 0:
        return np.array([0])
    idx = np.unique(np.floor(np.geomspace(1, n_iter, count)).astype(int) - 1)
    return idx[(idx >= 0) & (idx < n_iter)]


def _constraint_rows(problem, a0: SymmetricDensity, dd: DegreeDistribution, degrees):
    """(coefficient rows, right-hand sides) for one channel under incumbent ``dd``."""
    ops = grid_ops(a0.grid)
    ddn = dd.normalized()
    a0f = _as_full(ops, a0)
    state = _as_mag(a0)
    states = [state]
    for _ in range(problem.max_iter):
        state = _step(ops, a0f, state, ddn)
        states.append(state)
        if _mag_functionals(ops.grid, *state)[0] <= problem.target:
            break
    rows, rhs = [], []
    inc = dict(ddn.lam)
    for ell in _tracked(len(states) - 1, problem.tracked):
        p_in = _mag_functionals(ops.grid, *states[ell])[0]
        b = _to_full(ops, *_check_mixture(ops, states[ell], ddn))
        coef = np.zeros(len(degrees))
        cur = None
        for col, d in enumerate(degrees):
            cur = b if cur is None else _vconv(ops, cur, b)
            coef[col] = _p_full(ops, _vconv(ops, a0f, cur))
        p_inc = sum(inc.get(d, 0.0) * c for d, c in zip(degrees, coef))
        rows.append(coef)
        # never tighter than what the incumbent already achieves
        rhs.append(max((1.0 - problem.margin) * p_in, p_inc))
    return rows, rhs


def _lp(problem, dd, degrees, rows, rhs, radius):
    inc = dict(dd.normalized().lam)
    x0 = np.array([inc.get(d, 0.0) for d in degrees])
    c = -1.0 / np.asarray(degrees, dtype=float)
    lo = np.maximum(0.0, x0 - radius)
    hi = np.minimum(1.0, x0 + radius)
    if problem.stability_cap:
        rp = sum(f * (k - 1) for k, f in problem.rho)
        bmax = problem.b_max
        if bmax > 0:
            cap = (1.0 - 1e-9) / (bmax * rp)
            hi[0] = min(hi[0], cap)
            lo[0] = min(lo[0], hi[0])
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=np.ones((1, len(degrees))), b_eq=[1.0],
                  bounds=list(zip(lo, hi)), method="highs")
    if res.status != 0:
        return None
    lam = np.where(res.x < COEF_FLOOR, 0.0, res.x)
    return lam / lam.sum()


def optimize_lambda(problem: DesignProblem, initial: DegreeDistribution | None = None, log=None) -> DesignResult:
    """Raise the design rate of ``initial`` (or a regular seed) while keeping
    convergence on every channel of ``problem``."""
    if problem.rho is None:
        raise ParameterError("problem has no check distribution; use sweep_rho")
    if initial is None:
        dd, reports = seed_code(problem)
    else:
        dd = DegreeDistribution(initial.lam, problem.rho)
        ok, reports = _all_converge(problem, dd)
        if not ok:
            raise DesignInfeasibleError("initial code does not converge on every channel", {"initial": dd.to_json()})
    degrees = list(range(2, problem.max_var_degree + 1))
    rate = design_rate(dd)
    history = [rate]
    counts = []
    lp_iters = 0
    radius = problem.trust_region
    degenerate = False
    for _ in range(problem.max_rounds):
        rows, rhs = [], []
        for a0 in problem.channels:
            r, b = _constraint_rows(problem, a0, dd, degrees)
            rows += r
            rhs += b
        counts.append((len(problem.channels), len(rows)))
        degenerate = not np.any(np.array(rows) > 0)
        improved = False
        while radius >= 1e-3:
            lam = _lp(problem, dd, degrees, rows, rhs, radius)
            lp_iters += 1
            if lam is None:
                radius /= 2
                continue
            cand = DegreeDistribution(tuple((d, f) for d, f in zip(degrees, lam) if f > 0), problem.rho)
            cand_rate = design_rate(cand)
            if cand_rate <= rate + 1e-12:
                break
            # failing channels first on re-verification
            order = sorted(range(len(reports)), key=lambda i: -(reports[i].iterations_used if reports[i] else 0))
            ok, cand_reports = _all_converge(problem, cand, order)
            if ok:
                gain = cand_rate - rate
                dd, rate, reports = cand, cand_rate, cand_reports
                history.append(rate)
                improved = gain >= problem.min_improvement
                if log:
                    log(f"round {len(history) - 1}: rate {rate:.6f} radius {radius:.4f}")
                break
            radius /= 2
        if not improved:
            break
    assert all(b >= a for a, b in zip(history, history[1:])), "design rate decreased"
    return DesignResult(dd, rate, reports, lp_iters, history, counts, degenerate)


def sweep_rho(problem: DesignProblem, k_range, fractions=(1.0, 0.75, 0.5, 0.25), log=None) -> DesignResult:
    """Best ``optimize_lambda`` result over rho = frac x^(k-1) + (1-frac) x^k.

    Candidates run in order of increasing mean check degree; a later one
    replaces the incumbent only if its rate is higher by more than 1e-4.
    """
    k_range = sorted(set(int(k) for k in k_range))
    if not k_range:
        raise ParameterError("k_range is empty")
    best = None
    failures = []
    for k in k_range:
        for frac in fractions:
            rho = rho_family(k, frac)
            try:
                res = optimize_lambda(problem.with_rho(rho), log=log)
            except (DesignInfeasibleError, ParameterError) as exc:
                failures.append({"rho": [list(p) for p in rho], "error": str(exc)})
                continue
            if log:
                log(f"rho={rho} rate={res.rate:.6f}")
            if best is None or res.rate > best.rate + 1e-4:
                best = res
    if best is None:
        raise DesignInfeasibleError("no check distribution in the sweep admits a converging code",
                                    {"k_range": k_range, "failures": failures})
    return best
