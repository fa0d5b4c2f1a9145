import math

import pytest

from persistgp import (
    Band,
    DomainError,
    Hurst,
    digamma,
    hyp2f1_special,
    ln_gamma,
    sigma_constants,
)
from conftest import EULER_GAMMA, f21_series_oracle, sigma_tilde_sq_oracle

# frozen from the defining-series oracle (cross-checked against mpmath)
F21_QUARTER_HALF = 1.0952202196882643
# frozen from math.lgamma: 2^{1/2} Gamma(3/4)^2 / sqrt(pi)
SIGMA_TILDE_SQ_025 = 1.1981402347355914


class TestHurst:
    def test_validation(self):
        with pytest.raises(DomainError):
            Hurst(0.0)
        with pytest.raises(DomainError):
            Hurst(1.0)
        with pytest.raises(DomainError):
            Hurst(float("nan"))

    def test_bands(self):
        assert Hurst(0.3).band is Band.LOWER_HALF
        assert Hurst(0.7).band is Band.UPPER_HALF
        assert Hurst(0.5).band is Band.DEGENERATE_HALF
        assert Hurst(0.4999).band is Band.DEGENERATE_HALF
        assert Hurst(0.4995).band is Band.DEGENERATE_HALF
        # 0.5 - 0.499 rounds to just above 1e-3 in binary, so the boundary
        # values 0.499/0.501 fall outside the inclusive band
        assert Hurst(0.499).band is Band.LOWER_HALF
        assert Hurst(0.49).band is Band.LOWER_HALF
        # tightening the band frees values near 1/2
        assert Hurst(0.4995, eps_half=1e-4).band is Band.LOWER_HALF


class TestLnGamma:
    def test_gamma_one_is_zero(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-14)

    def test_gamma_half(self):
        # Gamma(1/2) = sqrt(pi)
        assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    def test_factorial(self):
        assert ln_gamma(4.0) == pytest.approx(math.log(6.0), rel=1e-14)

    def test_against_stdlib_on_wide_range(self):
        # contract: relative error <= 1e-13 on [1e-3, 1e3]
        xs = [1e-3 * 10 ** (6 * k / 200) for k in range(201)]
        for x in xs:
            ref = math.lgamma(x)
            assert abs(ln_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            ln_gamma(0.0)
        with pytest.raises(DomainError):
            ln_gamma(-1.5)


class TestDigamma:
    def test_psi_one(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-13)

    def test_psi_half(self):
        assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-13)

    def test_psi_two_by_recurrence(self):
        # psi(x+1) = psi(x) + 1/x applied to psi(1)
        assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-13)

    def test_recurrence_property(self):
        for x in (0.05, 0.37, 1.9, 12.3, 400.0):
            assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-12)

    def test_harmonic_values(self):
        # psi(n) = -gamma + H_{n-1}
        acc = 0.0
        for n in range(2, 12):
            acc += 1.0 / (n - 1)
            assert digamma(float(n)) == pytest.approx(-EULER_GAMMA + acc, abs=1e-12)

    def test_matches_lngamma_derivative(self):
        # centered finite difference of ln_gamma matches digamma to 1e-6
        h = 1e-5
        for x in (0.3, 1.0, 2.7, 15.0, 200.0):
            fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2 * h)
            assert abs(fd - digamma(x)) < 1e-6

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(-3.0)


class TestHyp2F1Special:
    def test_at_zero(self):
        assert hyp2f1_special(0.3, 0.0) == 1.0

    def test_vanishing_upper_parameter(self):
        # H = 1/2 kills every series term
        assert hyp2f1_special(0.5, 0.7) == 1.0

    def test_frozen_series_value(self):
        oracle = f21_series_oracle(1.0, 0.25, 1.75, 0.5)
        assert oracle == pytest.approx(F21_QUARTER_HALF, rel=1e-14)
        assert hyp2f1_special(0.25, 0.5) == pytest.approx(F21_QUARTER_HALF, rel=1e-10)

    @pytest.mark.parametrize("h", [0.05, 0.25, 0.45, 0.55, 0.75, 0.95])
    @pytest.mark.parametrize("x", [0.1, 0.49, 0.51, 0.8, 0.95, 0.999, 0.99999])
    def test_against_defining_series(self, h, x):
        ref = f21_series_oracle(1.0, 0.5 - h, 1.5 + h, x)
        assert hyp2f1_special(h, x) == pytest.approx(ref, rel=1e-10)

    def test_gauss_summation_limit(self):
        # 2F1(...; x) -> (1+2H)/(4H) as x -> 1 (Gauss summation); the
        # approach is O((1-x)^{2H})
        for h in (0.2, 0.35):
            limit = (1 + 2 * h) / (4 * h)
            assert hyp2f1_special(h, 1 - 1e-12) == pytest.approx(
                limit, rel=3 * 1e-12 ** (2 * h)
            )

    def test_upper_bound_property(self):
        # for H < 1/2: 1 <= F <= Gamma(H+3/2)/(Gamma(3/2-H) Gamma(2H+1)) / (1-x)
        for h in (0.1, 0.25, 0.4):
            pref = math.exp(
                math.lgamma(h + 1.5) - math.lgamma(1.5 - h) - math.lgamma(2 * h + 1)
            )
            for x in (0.0, 0.3, 0.6, 0.9, 0.99):
                f = hyp2f1_special(h, x)
                assert f >= 1.0 - 1e-12
                assert f <= pref / (1.0 - x) + 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            hyp2f1_special(0.3, 1.0)
        with pytest.raises(DomainError):
            hyp2f1_special(0.3, -0.1)


class TestSigmaConstants:
    def test_exact_at_half(self):
        sc = sigma_constants(0.5)
        assert sc.sigma_tilde_sq == 1.0
        assert sc.var_m1 == 0.0

    def test_frozen_value_quarter(self):
        sc = sigma_constants(0.25)
        assert sigma_tilde_sq_oracle(0.25) == pytest.approx(SIGMA_TILDE_SQ_025, rel=1e-14)
        assert sc.sigma_tilde_sq == pytest.approx(SIGMA_TILDE_SQ_025, rel=1e-12)

    def test_limit_at_zero(self):
        assert 1.9 < sigma_constants(0.01).sigma_tilde_sq < 2.0
        assert sigma_constants(1e-4).sigma_tilde_sq == pytest.approx(2.0, abs=2e-3)

    def test_limit_at_one(self):
        h = 1.0 - 1e-4
        assert (1.0 - h) * sigma_constants(h).sigma_tilde_sq == pytest.approx(0.25, abs=1e-3)

    def test_tilde_is_2h_sigma_sq(self):
        for h in (0.1, 0.3, 0.49, 0.51, 0.77, 0.93):
            sc = sigma_constants(h)
            assert sc.sigma_tilde_sq == pytest.approx(2 * h * sc.sigma_sq, rel=1e-14)

    def test_var_m1_positive_outside_band(self):
        for h in (0.01, 0.2, 0.45, 0.55, 0.8, 0.99):
            assert sigma_constants(h).var_m1 > 0.0

    def test_strictly_above_one_and_convex(self):
        hs = [round(0.01 * k, 2) for k in range(1, 100)]
        vals = [sigma_constants(Hurst(h, eps_half=1e-9)).sigma_tilde_sq for h in hs]
        for h, v in zip(hs, vals):
            if h != 0.5:
                assert v > 1.0
        second = [a - 2 * b + c for a, b, c in zip(vals, vals[1:], vals[2:])]
        assert min(second) > 0.0

    def test_against_lgamma_oracle_grid(self):
        for k in range(1, 20):
            h = 0.05 * k
            if h == 0.5:
                continue
            assert sigma_constants(h).sigma_tilde_sq == pytest.approx(
                sigma_tilde_sq_oracle(h), rel=1e-12
            )
