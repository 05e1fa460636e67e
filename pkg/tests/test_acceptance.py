"""Acceptance checks, one test per criterion.

Run ``pytest tests/test_acceptance.py -v`` (or ``python tests/test_acceptance.py``);
a PASS/FAIL line per criterion is printed in the terminal summary.  Criteria
6 to 8 are slow (about two hours together on one core).  Their raw results
land in ``artifacts/`` (override with ``UNILDPC_ARTIFACTS``).
"""

import json
import math
import os
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from unildpc.decoder import measure_ber
from unildpc.decomposition import decompose, default_levels, make_basis, recompose, sample_channel
from unildpc.density import (
    BEC,
    BIAWGN,
    BSC,
    DEFAULT_GRID,
    ErrorProbDensity,
    Explicit,
    bhattacharyya,
    capacity,
    channel_to_json,
    error_prob,
    from_error_prob_density,
    make_density,
    mix,
)
from unildpc.ensemble import AWGN_CODE, UNIVERSAL_CODE, DegreeDistribution, design_rate
from unildpc.entropy import binary_entropy, binary_entropy_inverse
from unildpc.evolution import converges, evolve
from unildpc.stability import b_recursion, stability_check
from unildpc.threshold import universal_threshold, validate_conjecture

ARTIFACTS = Path(os.environ.get("UNILDPC_ARTIFACTS", Path(__file__).resolve().parents[1] / "artifacts"))
CODES = {"awgn": AWGN_CODE, "universal": UNIVERSAL_CODE}
R36 = DegreeDistribution.regular(3, 6)

# matched capacity for the BER comparison: between the two published
# universal thresholds, where the comparison is meant to discriminate
BER_CAPACITY = 0.645
BER_BLOCK = 20_000
BER_FRAMES = 1000  # 2e7 bits per point
# how far the AWGN-optimized code may trail on the Gaussian channel
BIAWGN_MARGIN = 1e-3
# The printed AWGN coefficients give rate 0.570.  Moving rho up one degree
# restores rate 0.600; BER for this variant is recorded for reference only.
AWGN_RATE_MATCHED = DegreeDistribution(AWGN_CODE.lam, ((14, 0.5), (15, 0.5)))


def _save(name, obj):
    ARTIFACTS.mkdir(parents=True, exist_ok=True)
    with open(ARTIFACTS / name, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _random_g(rng, max_points=6):
    k = int(rng.integers(1, max_points + 1))
    return ErrorProbDensity.from_points(zip(rng.uniform(0, 0.5, k), rng.dirichlet(np.ones(k))), renormalize=True)


def _random_dd(rng):
    while True:
        vd = np.sort(rng.choice(np.arange(2, 13), size=int(rng.integers(1, 4)), replace=False))
        k = int(rng.integers(4, 12))
        rd = [k] if rng.random() < 0.5 else [k, k + 1]
        lam = tuple(zip(vd.tolist(), rng.dirichlet(np.ones(vd.size)).tolist()))
        rho = tuple(zip(rd, rng.dirichlet(np.ones(len(rd))).tolist()))
        try:
            dd = DegreeDistribution(lam, rho).normalized()
        except ValueError:  # rate outside (0, 1)
            continue
        if 0.05 < design_rate(dd) < 0.95:
            return dd


@pytest.fixture(scope="module")
def thresholds():
    out = {}
    for name, dd in CODES.items():
        out[name] = universal_threshold(dd)
        _save(f"threshold_{name}.json", out[name].to_json())
    return out


@pytest.mark.criterion(1, "functional closed forms")
def test_criterion_1_closed_forms():
    a = make_density(BSC(0.11))
    assert capacity(a) == pytest.approx(0.500087, abs=1e-4)
    for eps in (0.01, 0.05, 0.11, 0.2, 0.3, 0.45):
        a = make_density(BSC(eps))
        g = ErrorProbDensity.from_points([(eps, 1.0)])
        b = 2 * math.sqrt(eps * (1 - eps))
        assert bhattacharyya(a) == pytest.approx(b, abs=1e-4)
        assert error_prob(a) == pytest.approx(eps, abs=1e-4)
        assert g.bhattacharyya() == pytest.approx(b, abs=1e-9)
        assert g.error_prob() == pytest.approx(eps, abs=1e-9)
    exact = ErrorProbDensity.from_points([(0.11, 1.0)]).capacity()
    assert exact == pytest.approx(1 - binary_entropy(0.11), abs=1e-9)
    # the quoted 0.500087 is a rounding of 1 - h(0.11) = 0.5000840
    assert exact == pytest.approx(0.500087, abs=1e-4)
    for e in (0.0, 0.1, 0.4294, 0.7, 1.0):
        assert bhattacharyya(make_density(BEC(e))) == pytest.approx(e, abs=1e-4)
        assert ErrorProbDensity.from_points([(0.0, 1 - e), (0.5, e)]).bhattacharyya() == pytest.approx(e, abs=1e-9)


@pytest.mark.criterion(2, "sandwich and mixture linearity")
def test_criterion_2_sandwich_linearity():
    rng = np.random.default_rng(2)
    for _ in range(500):
        g1, g2 = _random_g(rng), _random_g(rng)
        for g in (g1, g2):
            p, b = g.error_prob(), g.bhattacharyya()
            assert 2 * p <= b + 1e-9
            assert b <= 2 * math.sqrt(p * (1 - p)) + 1e-9
        gamma = float(rng.random())
        gm = ErrorProbDensity.from_points([(p, gamma * m) for p, m in g1.points]
                                          + [(p, (1 - gamma) * m) for p, m in g2.points])
        for f in ("capacity", "bhattacharyya", "error_prob"):
            want = gamma * getattr(g1, f)() + (1 - gamma) * getattr(g2, f)()
            assert getattr(gm, f)() == pytest.approx(want, abs=1e-9)
        # the same on the quantized grid, where mixing is exact
        a1, a2 = from_error_prob_density(g1), from_error_prob_density(g2)
        am = mix([(gamma, a1), (1 - gamma, a2)])
        for f in (capacity, bhattacharyya, error_prob):
            assert f(am) == pytest.approx(gamma * f(a1) + (1 - gamma) * f(a2), abs=1e-9)


@pytest.mark.criterion(3, "BEC oracle equivalence and (3,6) threshold")
def test_criterion_3_bec_oracle():
    rng = np.random.default_rng(3)
    iters = 40
    for _ in range(50):
        dd = _random_dd(rng)
        e = float(rng.uniform(0.05, 0.8))
        a0 = make_density(BEC(e))
        de = [b for _, _, b in evolve(a0, dd, iters)]
        x, scalar = e, []
        for _ in range(iters):
            x = e * dd.lambda_poly(1 - dd.rho_poly(1 - x))
            scalar.append(x)
        np.testing.assert_allclose(de, scalar, atol=1e-3)
        np.testing.assert_allclose(b_recursion(e, dd, iters), scalar, atol=1e-12)
    lo, hi = 0.40, 0.46
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if converges(make_density(BEC(mid)), R36).converged:
            lo = mid
        else:
            hi = mid
    assert 0.5 * (lo + hi) == pytest.approx(0.4294, abs=5e-3)


@pytest.mark.criterion(4, "decomposition round trip")
def test_criterion_4_decomposition():
    rng = np.random.default_rng(4)
    for c in (0.4, 0.5, 0.628, 0.662):
        basis = make_basis(c, *default_levels(c))
        for ch in basis.channels:
            assert ch.density().capacity() == pytest.approx(c, abs=1e-12)
        for _ in range(1000):
            g = sample_channel(c, basis, rng)
            w = decompose(g, basis)
            assert np.all(w.weights >= 0) and w.xi_mass >= 0
            assert recompose(w, basis).total_variation(g) <= 1e-9


@pytest.mark.criterion(5, "stability arithmetic and design rates")
def test_criterion_5_arithmetic():
    assert UNIVERSAL_CODE.lambda2 * UNIVERSAL_CODE.rho_prime_1 == pytest.approx(1.9287, abs=1e-4)
    rep = stability_check(make_density(BSC(0.05)), UNIVERSAL_CODE)
    assert rep.lambda2 * rep.rho_prime_1 == pytest.approx(1.9287, abs=1e-4)
    assert design_rate(UNIVERSAL_CODE) == pytest.approx(0.6001, abs=5e-4)
    assert design_rate(AWGN_CODE) == pytest.approx(0.6, abs=5e-3)


@pytest.mark.slow
@pytest.mark.criterion(6, "universal thresholds of the two published codes")
def test_criterion_6_thresholds(thresholds):
    got = {k: r.c_u_star for k, r in thresholds.items()}
    for r in thresholds.values():
        assert r.monotone
    assert got["universal"] == pytest.approx(0.628, abs=0.01), got
    assert got["awgn"] == pytest.approx(0.662, abs=0.01), got


@pytest.mark.slow
@pytest.mark.criterion(7, "convergence on random channels and mixtures")
def test_criterion_7_conjecture(thresholds):
    reports = {}
    for name, dd in CODES.items():
        c = thresholds[name].c_u_star + 0.005
        # the search already ran DE on the basis up to C_u* + 3 tol
        rep = validate_conjecture(dd, c, 1000, 100, seed=7, check_basis=False)
        reports[name] = rep
        _save(f"conjecture_{name}.json", rep.to_json())
    for name, rep in reports.items():
        assert rep.tested >= 1000 + 200
        assert rep.passed, f"{name}: {len(rep.counterexamples)} counterexamples, see {ARTIFACTS}"


def _biawgn_at(c):
    return BIAWGN(brentq(lambda s: capacity(make_density(BIAWGN(s))) - c, 0.05, 5.0, xtol=1e-10))


@pytest.mark.slow
@pytest.mark.criterion(8, "BER ordering at block length 2e4")
def test_criterion_8_ber():
    c = BER_CAPACITY
    basis = make_basis(c, *default_levels(c))
    sampled = Explicit(sample_channel(c, basis, seed=8))
    channels = {"bsc": BSC(binary_entropy_inverse(1 - c)), "mixture": sampled, "biawgn": _biawgn_at(c)}
    ber = {}
    rows = []
    runs = dict(CODES, awgn_rate_matched=AWGN_RATE_MATCHED)
    for name, dd in runs.items():
        pts = measure_ber(dd, BER_BLOCK, list(channels.values()), BER_FRAMES, seed=8)
        for key, p in zip(channels, pts):
            assert p.bits_sent >= 2 * 10**7
            assert p.capacity == pytest.approx(c, abs=1e-6)
            ber[name, key] = p.ber
            rows.append({"code": name, "rate": design_rate(dd), "channel": key, "spec": channel_to_json(p.channel),
                         "ber": p.ber, "bit_errors": p.bit_errors, "frame_errors": p.frame_errors})
    _save("ber.json", {"capacity": c, "n": BER_BLOCK, "frames": BER_FRAMES, "points": rows})
    assert ber["universal", "bsc"] < ber["awgn", "bsc"], ber
    assert ber["universal", "mixture"] < ber["awgn", "mixture"], ber
    assert ber["awgn", "biawgn"] <= ber["universal", "biawgn"] + BIAWGN_MARGIN, ber


@pytest.mark.criterion(9, "Bhattacharyya descent below P = 1e-4")
def test_criterion_9_descent():
    rng = np.random.default_rng(9)
    found = 0
    tried = 0
    while found < 50:
        tried += 1
        assert tried < 2000, "could not draw 50 stable converging instances"
        dd = _random_dd(rng)
        r = design_rate(dd)
        c = float(rng.uniform(r + 0.05, min(0.99, r + 0.3)))
        kind = rng.integers(3)
        if kind == 0:
            spec = BSC(binary_entropy_inverse(1 - c))
        elif kind == 1:
            spec = BEC(1 - c)
        else:
            spec = _biawgn_at(c)
        a0 = make_density(spec)
        if not stability_check(a0, dd).stable:
            continue
        rep = converges(a0, dd)
        if not rep.converged:
            continue
        found += 1
        traj = rep.trajectory
        start = next((k for k, (_, p, _) in enumerate(traj) if p <= 1e-4), None)
        assert start is not None
        b = [bb for _, _, bb in traj[start:]]
        assert all(y < x for x, y in zip(b, b[1:])), (dd, spec)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-rA"]))
