"""Shared independent oracles for the test suite.

These helpers deliberately avoid the package's own evaluation paths: the
hypergeometric oracle is the defining power series, gamma values come from
math.lgamma, and integrals use scipy QUADPACK directly.
"""

import math

import pytest

EULER_GAMMA = 0.5772156649015328606


def f21_series_oracle(a, b, c, x, tol=1e-15, max_terms=2_000_000):
    """Defining Gauss series sum_n (a)_n (b)_n / ((c)_n n!) x^n."""
    term = 1.0
    total = 1.0
    n = 0
    while True:
        term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * x
        total += term
        n += 1
        if abs(term) <= tol * abs(total) and n > 4:
            return total
        if n >= max_terms:
            raise RuntimeError("oracle series did not converge")


def sigma_tilde_sq_oracle(h):
    """pi^{-1/2} 2^{1-2H} Gamma(H+1/2) Gamma(1-H) via math.lgamma."""
    return math.exp(
        -0.5 * math.log(math.pi)
        + (1.0 - 2.0 * h) * math.log(2.0)
        + math.lgamma(h + 0.5)
        + math.lgamma(1.0 - h)
    )


def fbm_lamperti_corr_oracle(h, tau):
    """e^{-H tau} E[B_1 B_{e^tau}] from the FBM covariance."""
    t = math.exp(tau)
    cov = 0.5 * (t ** (2 * h) + 1.0 - abs(t - 1.0) ** (2 * h))
    return math.exp(-h * tau) * cov


@pytest.fixture(scope="session")
def rng_seed():
    return 20250810
