"""Self-contained special-function kernel.

Provides log-Gamma, digamma, the one hypergeometric family needed by the
Riemann-Liouville Lamperti correlation,

    F(H, x) = 2F1(1, 1/2 - H; 3/2 + H; x),          0 <= x < 1,

and the variance constants of the smooth moving-average component:

    sigma_tilde_sq(H) = pi^{-1/2} 2^{1-2H} Gamma(H + 1/2) Gamma(1 - H)
    sigma_sq(H)       = sigma_tilde_sq(H) / (2 H)
    var_m1(H)         = sigma_sq(H) - 1/(2 H)

var_m1 is the variance of the smooth component at time 1; it vanishes
quadratically at H = 1/2, which is why Hurst values carry a degenerate-band
classification around 1/2.

No external dependencies: everything here is plain math-module scalar code so
the rest of the package can treat it as a trusted kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, SeriesError

__all__ = [
    "Band",
    "Hurst",
    "SigmaConstants",
    "as_hurst",
    "ln_gamma",
    "digamma",
    "hyp2f1_special",
    "sigma_constants",
]

EPS_HALF_DEFAULT = 1e-3


class Band(Enum):
    """Position of a Hurst value relative to the degenerate point 1/2."""

    LOWER_HALF = "lower"
    DEGENERATE_HALF = "degenerate"
    UPPER_HALF = "upper"


@dataclass(frozen=True)
class Hurst:
    """Validated Hurst parameter with degenerate-band classification.

    The band half-width eps_half is configurable: the default 1e-3 keeps the
    cancellation in the closed-form correlation below ~1e-7 in double
    precision.  Code that deliberately evaluates very close to 1/2 (e.g. the
    two-sided continuity checks at 0.5 +- 1e-3) constructs a Hurst with a
    smaller eps_half.
    """

    value: float
    eps_half: float = EPS_HALF_DEFAULT

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 1.0) or not math.isfinite(v):
            raise DomainError(f"Hurst value must lie in (0, 1), got {self.value!r}")
        if not (0.0 < self.eps_half < 0.5):
            raise DomainError(f"eps_half must lie in (0, 0.5), got {self.eps_half!r}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "eps_half", float(self.eps_half))

    @property
    def band(self) -> Band:
        if abs(self.value - 0.5) <= self.eps_half:
            return Band.DEGENERATE_HALF
        return Band.LOWER_HALF if self.value < 0.5 else Band.UPPER_HALF

    @property
    def degenerate(self) -> bool:
        return self.band is Band.DEGENERATE_HALF


def as_hurst(h, eps_half=None) -> Hurst:
    """Coerce a float (or Hurst) to a validated Hurst."""
    if isinstance(h, Hurst):
        return h
    return Hurst(float(h), EPS_HALF_DEFAULT if eps_half is None else eps_half)


# ---------------------------------------------------------------------------
# log-Gamma and digamma
# ---------------------------------------------------------------------------

# Lanczos approximation, g = 7, 9 terms (Godfrey coefficients).  Relative
# error of exp(ln_gamma) is a few ulp over the positive axis, which keeps
# ln_gamma well under the 1e-13 contract on [1e-3, 1e3].
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0 via Lanczos with reflection below 1/2."""
    if not (x > 0.0):
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    if x < 0.5:
        # Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - ln_gamma(1.0 - x)
    z = x - 1.0
    series = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        series += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(series)


def _ln_gamma_signed(x: float):
    """(log|Gamma(x)|, sign) for non-pole real x, via reflection for x < 0."""
    if x > 0.0:
        return ln_gamma(x), 1.0
    if x == math.floor(x):
        raise DomainError(f"Gamma pole at {x!r}")
    s = math.sin(math.pi * x)
    return math.log(math.pi / abs(s)) - ln_gamma(1.0 - x), math.copysign(1.0, s)


# Asymptotic tail coefficients -B_{2n}/(2n): psi(x) ~ ln x - 1/(2x) + sum c_n x^{-2n}
_DIGAMMA_TAIL = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
)
_DIGAMMA_SHIFT = 10.0


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x) for x > 0.

    Recurrence up to x >= 10 followed by the Bernoulli asymptotic series;
    truncation error there is below 1e-14 absolute.
    """
    if not (x > 0.0):
        raise DomainError(f"digamma requires x > 0, got {x!r}")
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for c in _DIGAMMA_TAIL:
        tail += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x + tail


# ---------------------------------------------------------------------------
# The hypergeometric family 2F1(1, 1/2-H; 3/2+H; x)
# ---------------------------------------------------------------------------

_SERIES_MAX_TERMS = 2_000_000


def _hyp_series(a: float, b: float, c: float, x: float) -> float:
    """Defining Gauss series at argument x; geometric for x bounded away from 1."""
    term = 1.0
    total = 1.0
    for n in range(_SERIES_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * x
        total += term
        if abs(term) <= 1e-17 * abs(total) and n > 4:
            return total
    raise SeriesError(
        f"2F1 series did not converge at x={x!r} within {_SERIES_MAX_TERMS} terms"
    )


def _hyp_near_one(h: float, y: float) -> float:
    """Connection formula at x = 1 - y, valid while 2H is not near an integer.

    The generic x -> 1-x formula collapses here because the second series has
    equal upper and lower parameters (1+2H), i.e. is a pure binomial:

        F = (1+2H)/(4H) 2F1(1, 1/2-H; 1-2H; y) + B y^{2H} (1-y)^{-(1/2+H)},
        B = Gamma(3/2+H) Gamma(-2H) / Gamma(1/2-H)  (negative for all H).
    """
    a_coef = (1.0 + 2.0 * h) / (4.0 * h)
    lg1, s1 = _ln_gamma_signed(1.5 + h)
    lg2, s2 = _ln_gamma_signed(-2.0 * h)
    lg3, s3 = _ln_gamma_signed(0.5 - h)
    b_coef = s1 * s2 * s3 * math.exp(lg1 + lg2 - lg3)
    head = _hyp_series(1.0, 0.5 - h, 1.0 - 2.0 * h, y)
    return a_coef * head + b_coef * y ** (2.0 * h) * (1.0 - y) ** (-(0.5 + h))


def hyp2f1_special(H, x: float) -> float:
    """2F1(1, 1/2-H; 3/2+H; x) on 0 <= x < 1.

    Direct series for x <= 1/2.  For x > 1/2 the Euler transformation
    2F1(a,b;c;x) = (1-x)^{c-a-b} 2F1(c-a,c-b;c;x) is applied (c-a-b = 2H);
    the transformed series has positive terms, so evaluation stays monotone
    and cancellation-free as x -> 1, where the (1-x)^{2H} prefactor carries
    the singular behaviour.  Its term count grows like 1/(1-x), so very close
    to 1 the x -> 1-x connection formula takes over (except for H so close to
    {0, 1/2, 1} that the connection coefficients degenerate; there the slow
    monotone series remains the evaluation of record).
    """
    h = as_hurst(H).value
    if not (0.0 <= x < 1.0):
        raise DomainError(f"hyp2f1_special requires 0 <= x < 1, got {x!r}")
    if x == 0.0 or h == 0.5:
        # upper parameter 1/2 - H vanishes at H = 1/2: every term after the
        # zeroth dies, so the function is identically 1
        return 1.0
    if x <= 0.5:
        return _hyp_series(1.0, 0.5 - h, 1.5 + h, x)
    # 1 - x is exact for x in [0.5, 1) (Sterbenz)
    y = 1.0 - x
    if y < 0.01 and min(abs(2.0 * h - 1.0), 2.0 * h, 2.0 - 2.0 * h) > 0.04:
        return _hyp_near_one(h, y)
    return y ** (2.0 * h) * _hyp_series(0.5 + h, 1.0 + 2.0 * h, 1.5 + h, x)


# ---------------------------------------------------------------------------
# Variance constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaConstants:
    """Variance constants of the smooth component for one Hurst value."""

    sigma_sq: float
    sigma_tilde_sq: float
    var_m1: float


def sigma_constants(H) -> SigmaConstants:
    """Evaluate sigma_tilde_sq, sigma_sq and var_m1 = sigma_sq - 1/(2H).

    Uses the duplication-formula form pi^{-1/2} 2^{1-2H} Gamma(H+1/2)
    Gamma(1-H), which is smooth across the whole interval.  H = 1/2 is exact:
    (1, 1, 0).  Inside the degenerate band a negative var_m1 at roundoff
    level is clamped to zero; outside the band var_m1 is strictly positive.
    """
    hu = as_hurst(H)
    h = hu.value
    if h == 0.5:
        return SigmaConstants(sigma_sq=1.0, sigma_tilde_sq=1.0, var_m1=0.0)
    log_st2 = (
        -0.5 * math.log(math.pi)
        + (1.0 - 2.0 * h) * math.log(2.0)
        + ln_gamma(h + 0.5)
        + ln_gamma(1.0 - h)
    )
    st2 = math.exp(log_st2)
    var1 = (st2 - 1.0) / (2.0 * h)
    if var1 < 0.0:
        # only possible at roundoff level very close to 1/2
        if not hu.degenerate or var1 < -1e-12:
            raise DomainError(
                f"variance constant came out negative ({var1!r}) at H={h!r}"
            )
        var1 = 0.0
    return SigmaConstants(sigma_sq=st2 / (2.0 * h), sigma_tilde_sq=st2, var_m1=var1)
