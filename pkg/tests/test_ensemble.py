import pytest

from unildpc.ensemble import AWGN_CODE, REFERENCE_CODES, UNIVERSAL_CODE, DegreeDistribution, design_rate
from unildpc.errors import ParameterError


class TestDegreeDistribution:
    def test_regular(self):
        dd = DegreeDistribution.regular(3, 6)
        assert dd.lam == ((3, 1.0),) and dd.rho == ((6, 1.0),)
        assert design_rate(dd) == 0.5
        assert dd.lambda2 == 0.0
        assert dd.rho_prime_1 == 5.0

    def test_merges_and_sorts(self):
        dd = DegreeDistribution(((3, 0.25), (2, 0.5), (3, 0.25)), ((6, 1.0),))
        assert dd.lam == ((2, 0.5), (3, 0.5))

    @pytest.mark.parametrize(
        "lam,rho",
        [
            (((1, 1.0),), ((6, 1.0),)),
            (((3, -0.1), (4, 1.1)), ((6, 1.0),)),
            (((3, 0.5),), ((6, 1.0),)),
            ((), ((6, 1.0),)),
            (((2, 1.0),), ((2, 1.0),)),  # rate 0
        ],
    )
    def test_invalid(self, lam, rho):
        with pytest.raises(ParameterError):
            DegreeDistribution(lam, rho)

    def test_json_round_trip(self):
        dd = UNIVERSAL_CODE
        assert DegreeDistribution.from_json(dd.to_json()) == dd
        assert DegreeDistribution.from_json('{"lambda": [[3, 1]], "rho": [[6, 1]]}') == DegreeDistribution.regular(3, 6)

    def test_json_malformed(self):
        with pytest.raises(ParameterError):
            DegreeDistribution.from_json({"lambda": [[3, 1]]})

    def test_normalized(self):
        n = UNIVERSAL_CODE.normalized()
        assert sum(f for _, f in n.lam) == pytest.approx(1.0, abs=1e-15)
        assert DegreeDistribution.regular(3, 6).normalized() == DegreeDistribution.regular(3, 6)

    def test_polynomials(self):
        dd = DegreeDistribution(((2, 0.5), (3, 0.5)), ((6, 1.0),))
        assert dd.lambda_poly(0.5) == pytest.approx(0.5 * 0.5 + 0.5 * 0.25)
        assert dd.rho_poly(0.5) == pytest.approx(0.5**5)

    def test_str(self):
        assert "x^5" in str(DegreeDistribution.regular(3, 6))


class TestPublishedCodes:
    def test_universal_rate(self):
        # sum rho_k/k = 0.080645, sum lambda_i/i = 0.20166
        assert sum(f / k for k, f in UNIVERSAL_CODE.rho) == pytest.approx(0.080645, abs=1e-6)
        assert sum(f / i for i, f in UNIVERSAL_CODE.lam) == pytest.approx(0.20166, abs=1e-5)
        assert design_rate(UNIVERSAL_CODE) == pytest.approx(0.6001, abs=5e-4)

    def test_universal_stability_product(self):
        assert UNIVERSAL_CODE.lambda2 * UNIVERSAL_CODE.rho_prime_1 == pytest.approx(1.9287, abs=1e-4)

    def test_degrees(self):
        assert UNIVERSAL_CODE.max_var_degree == 50
        assert AWGN_CODE.max_var_degree == 100
        assert [k for k, _ in UNIVERSAL_CODE.rho] == [12, 13]

    def test_awgn_rate_as_printed(self):
        # the printed coefficients give 0.5702, not the stated 0.6
        assert design_rate(AWGN_CODE) == pytest.approx(0.5702, abs=1e-4)

    def test_registry(self):
        assert set(REFERENCE_CODES) == {"awgn", "universal", "regular36"}
