import math

import numpy as np
import pytest

from unildpc.decoder import (
    CHANNEL_POINTS,
    MAX_LEVEL,
    TannerGraph,
    ber_csv,
    build_graph,
    channel_view,
    decode,
    measure_ber,
    quantize_llr,
    random_codeword,
    transmit,
)
from unildpc.density import BEC, BIAWGN, BSC, Mix, capacity, make_density
from unildpc.ensemble import UNIVERSAL_CODE, DegreeDistribution
from unildpc.errors import ParameterError

R36 = DegreeDistribution.regular(3, 6)


class TestQuantizer:
    def test_range(self):
        q = quantize_llr(np.array([-1e9, -20.0, 0.0, 20.0, np.inf]))
        np.testing.assert_array_equal(q, [-MAX_LEVEL, -MAX_LEVEL, 0, MAX_LEVEL, MAX_LEVEL])
        assert q.dtype == np.int16

    def test_odd_symmetry(self, rng):
        x = rng.normal(0, 10, 1000)
        np.testing.assert_array_equal(quantize_llr(-x), -quantize_llr(x))


class TestGraph:
    def test_regular_counts(self):
        g = build_graph(R36, 12, seed=0)
        assert (g.n, g.m, g.n_edges) == (12, 6, 36)
        assert set(g.var_degrees) == {3} and set(g.chk_degrees) == {6}

    def test_deterministic(self):
        a = build_graph(UNIVERSAL_CODE, 2000, seed=5)
        b = build_graph(UNIVERSAL_CODE, 2000, seed=5)
        np.testing.assert_array_equal(a.edge_var, b.edge_var)
        np.testing.assert_array_equal(a.chk_ptr, b.chk_ptr)
        c = build_graph(UNIVERSAL_CODE, 2000, seed=6)
        assert not np.array_equal(a.edge_var, c.edge_var)

    def test_edge_fractions(self):
        g = build_graph(UNIVERSAL_CODE, 100_000, seed=1)
        lam, rho = g.edge_fractions()
        for d, f in UNIVERSAL_CODE.normalized().lam:
            assert lam.get(d, 0.0) == pytest.approx(f, abs=1e-3)
        for k, f in UNIVERSAL_CODE.normalized().rho:
            assert rho.get(k, 0.0) == pytest.approx(f, abs=1e-3)
        assert g.double_edges == 0

    def test_adjacency_round_trip(self):
        g = build_graph(R36, 60, seed=3)
        h = TannerGraph.from_adjacency(g.to_adjacency(), g.n)
        np.testing.assert_array_equal(h.parity_matrix(), g.parity_matrix())
        np.testing.assert_array_equal(h.var_edges, g.var_edges)

    def test_too_short(self):
        with pytest.raises(ParameterError):
            build_graph(R36, 1)

    def test_codeword_in_null_space(self, rng):
        g = build_graph(R36, 120, seed=2)
        for _ in range(5):
            x = random_codeword(g, rng)
            assert not g.syndrome(x).any()
        assert (g.parity_matrix().astype(int) @ x % 2 == 0).all()


class TestDecode:
    def test_perfect_channel(self):
        g = build_graph(R36, 120, seed=0)
        res = decode(g, np.full(g.n, np.inf))
        assert res.iterations == 1 and res.parity_ok and not res.bits.any()

    def test_all_zero_llrs(self):
        g = build_graph(R36, 120, seed=0)
        res = decode(g, np.zeros(g.n), max_iter=5)
        # ties decide 0, which is a codeword
        assert res.parity_ok and not res.bits.any()

    def test_length_mismatch(self):
        g = build_graph(R36, 120, seed=0)
        with pytest.raises(ParameterError):
            decode(g, np.zeros(g.n + 1))

    def test_bec_below_threshold(self):
        pts = measure_ber(R36, 10_000, [BEC(0.35)], trials=3, seed=0)
        assert pts[0].ber < 1e-3

    def test_codeword_independence(self, rng):
        # channel symmetry: error statistics do not depend on the codeword
        g = build_graph(R36, 1200, seed=4)
        ch = channel_view(BSC(0.06))
        zero = np.zeros(g.n, dtype=np.uint8)
        fails = {"zero": 0, "random": 0}
        for _ in range(20):
            x = random_codeword(g, rng)
            rz = decode(g, transmit(ch, zero, rng))
            rx = decode(g, transmit(ch, x, rng))
            fails["zero"] += int(rz.bits.sum() > 0)
            fails["random"] += int(np.any(rx.bits != x))
        assert fails["zero"] <= 2 and fails["random"] <= 2


class TestChannels:
    def test_two_point_exact(self):
        assert channel_view(BSC(0.2)).points == [(0.2, 1.0)]
        assert channel_view(BEC(0.3)).capacity() == pytest.approx(0.7, abs=1e-15)

    def test_rich_channel_snapped(self):
        g = channel_view(BIAWGN(1.0))
        assert g.p.size <= CHANNEL_POINTS.size
        assert np.isin(g.p, CHANNEL_POINTS).all()
        assert g.capacity() == pytest.approx(capacity(make_density(BIAWGN(1.0))), abs=1e-9)

    def test_mixture(self):
        g = channel_view(Mix(((0.5, BSC(0.1)), (0.5, BEC(0.2)))))
        assert g.capacity() == pytest.approx(0.5 * (1 - 0.4689955935892812) + 0.5 * 0.8, abs=1e-9)

    def test_transmit_statistics(self, rng):
        llr = transmit(channel_view(BSC(0.1)), np.zeros(200_000, dtype=np.uint8), rng)
        assert np.mean(llr < 0) == pytest.approx(0.1, abs=3e-3)
        assert np.unique(np.abs(llr)).size == 1


class TestBer:
    def test_zero_trials(self):
        pts = measure_ber(R36, 120, [BSC(0.05)], trials=0, seed=0)
        assert pts[0].ber is None and pts[0].bits_sent == 0
        text = ber_csv(pts, ["meta line"])
        assert text == "# meta line\nchannel_json,capacity,bits_sent,bit_errors,ber\n"

    def test_deterministic(self):
        a = measure_ber(R36, 500, [BSC(0.08)], trials=5, seed=9)
        b = measure_ber(R36, 500, [BSC(0.08)], trials=5, seed=9)
        assert ber_csv(a) == ber_csv(b)

    def test_csv_row(self):
        pts = measure_ber(R36, 200, [BSC(0.01)], trials=2, seed=1)
        lines = ber_csv(pts).splitlines()
        assert len(lines) == 2 and lines[1].startswith('"{')
        assert int(lines[1].split(",")[-3]) == 400
