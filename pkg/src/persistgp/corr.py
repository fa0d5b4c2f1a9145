"""Correlation functions of the Lamperti-transformed fractional processes.

Unit-variance stationary correlations handled here, with tau >= 0 the
log-time lag:

    corr_ch(H, tau)       fractional Brownian motion after Lamperti:
                          cosh(H tau) - (2 sinh(tau/2))^{2H} / 2
    corr_rh(H, tau)       Riemann-Liouville component:
                          4H/(1+2H) e^{-tau/2} 2F1(1, 1/2-H; 3/2+H; e^{-tau})
    corr_gh_closed        smooth component, closed form
                          (st2 c_H - r_H) / (st2 - 1),  st2 = sigma_tilde_sq
    corr_gh_quad          same quantity from the kernel integrals
                          int K_0 K_tau / int K_0^2   (independent route)
    corr_gstar_half       the H -> 1/2 limit:
                          (3/pi^2) e^{-tau/2} int log(1+1/u) log(1+e^tau/u) du
    corr_rescaled         tau |-> base(tau / kappa)

Improper integrals are mapped through s = e^x, which turns the algebraic
endpoint singularity u^{H-1/2} and the algebraic tail u^{2H-3} into two-sided
exponential decay; truncation bounds come from the explicit tail estimates.
Kernel products are evaluated in log space, so no intermediate overflows even
for extreme lags.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import DegenerateHurstError, DomainError, QuadratureError
from .quadrature import QuadratureSpec, integrate_adaptive
from .specfun import Hurst, as_hurst, hyp2f1_special, sigma_constants

__all__ = [
    "CorrKind",
    "CorrelationFn",
    "corr_ch",
    "corr_rh",
    "corr_gh_closed",
    "corr_gh_quad",
    "corr_gstar_half",
    "corr_rescaled",
    "correlation_row",
    "gstar_integral",
    "kernel_K",
    "kernel_k",
    "make_correlation",
    "mh_cov_integral",
    "mh_variance_integral",
    "mstar_tail_variance",
    "selfsim_msd",
    "selfsim_tail_variance",
    "young_tail_constant",
]

_LN2 = 0.6931471805599453
_PI2_3 = math.pi * math.pi / 3.0


def _check_tau(tau):
    if not (tau >= 0.0) or not math.isfinite(tau):
        raise DomainError(f"lag tau must be finite and >= 0, got {tau!r}")
    return float(tau)


# ---------------------------------------------------------------------------
# numerically safe building blocks
# ---------------------------------------------------------------------------


def _softplus(z: float) -> float:
    """log(1 + e^z), stable for all z."""
    if z > 35.0:
        return z + math.log1p(math.exp(-z))
    if z < -700.0:
        return 0.0
    return math.log1p(math.exp(z))


def _log_abs_expm1(y: float) -> float:
    """log|expm1(y)|, stable for all y."""
    if y > 35.0:
        return y
    if y < -35.0:
        return 0.0
    if y == 0.0:
        return -math.inf
    return math.log(abs(math.expm1(y)))


def _log_k0_at_log(h: float, x: float) -> float:
    """log|K_0(e^x)| where K_0(s) = (1+s)^{H-1/2} - s^{H-1/2}.

    Written as s^{H-1/2} expm1((H-1/2) log(1+1/s)); correct sign is
    sign(H - 1/2).
    """
    return (h - 0.5) * x + _log_abs_expm1((h - 0.5) * _softplus(-x))


def _log_kt_at_log(h: float, log_t: float, x: float) -> float:
    """log|k_t(e^x)| for the self-similar kernel k_t(s) = (t+s)^{H-1/2} - s^{H-1/2}."""
    return (h - 0.5) * x + _log_abs_expm1((h - 0.5) * _softplus(log_t - x))


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def kernel_k(H, t: float, s: float) -> float:
    """Self-similar kernel k_t(s) = (t+s)^{H-1/2} - s^{H-1/2}, s > 0, t >= 0."""
    h = as_hurst(H).value
    if not (s > 0.0):
        raise DomainError(f"kernel_k requires s > 0, got {s!r}")
    if not (t >= 0.0):
        raise DomainError(f"kernel_k requires t >= 0, got {t!r}")
    if t == 0.0:
        return 0.0
    mag = math.exp(_log_kt_at_log(h, math.log(t), math.log(s)))
    return mag if h > 0.5 else -mag if h < 0.5 else 0.0


def kernel_K(H, tau: float, s: float) -> float:
    """Stationary kernel K_tau(s) = e^{-H tau}((e^tau + s)^{H-1/2} - s^{H-1/2}).

    Non-positive for H < 1/2, non-negative for H > 1/2, and satisfies the
    scaling identity K_tau(u) = e^{-tau/2} K_0(u e^{-tau}).
    """
    h = as_hurst(H).value
    tau = _check_tau(tau)
    if not (s > 0.0):
        raise DomainError(f"kernel_K requires s > 0, got {s!r}")
    mag = math.exp(-0.5 * tau + _log_k0_at_log(h, math.log(s) - tau))
    return mag if h > 0.5 else -mag if h < 0.5 else 0.0


# ---------------------------------------------------------------------------
# closed-form correlations
# ---------------------------------------------------------------------------


def corr_ch(H, tau: float) -> float:
    """FBM Lamperti correlation cosh(H tau) - (2 sinh(tau/2))^{2H} / 2.

    Evaluated via the algebraically equivalent factored form

        e^{-H tau}/2 - e^{H tau}/2 * expm1(2H log(1 - e^{-tau})),

    which is cancellation-free uniformly in tau (the naive cosh difference
    loses all precision beyond tau ~ 30/max(2H, 1)).
    """
    h = as_hurst(H).value
    tau = _check_tau(tau)
    if tau == 0.0:
        return 1.0
    if h * tau > 700.0:
        # e^{H tau} would overflow; both surviving terms are pure exponentials
        t1 = 0.5 * math.exp(-tau * h) if tau * h < 745.0 else 0.0
        t2 = h * math.exp(-tau * (1.0 - h)) if tau * (1.0 - h) < 745.0 else 0.0
        return t1 + t2
    if tau <= _LN2:
        log1me = math.log(-math.expm1(-tau))
    else:
        log1me = math.log1p(-math.exp(-tau))
    return 0.5 * math.exp(-h * tau) - 0.5 * math.exp(h * tau) * math.expm1(
        2.0 * h * log1me
    )


def corr_rh(H, tau: float) -> float:
    """Riemann-Liouville Lamperti correlation; exactly 1 at tau = 0."""
    h = as_hurst(H).value
    tau = _check_tau(tau)
    if tau == 0.0:
        # Gauss summation: 2F1(1, 1/2-H; 3/2+H; 1) = (1+2H)/(4H)
        return 1.0
    return (
        4.0 * h / (1.0 + 2.0 * h)
        * math.exp(-0.5 * tau)
        * hyp2f1_special(h, math.exp(-tau))
    )


def corr_gh_closed(H, tau: float) -> float:
    """Smooth-component correlation from the sigma_tilde_sq representation.

    Refuses the degenerate band around H = 1/2, where numerator and
    denominator both vanish; callers there should use corr_gstar_half or the
    quadrature route with a narrower band.
    """
    hu = as_hurst(H)
    tau = _check_tau(tau)
    if hu.degenerate:
        raise DegenerateHurstError(
            f"closed-form correlation is 0/0 near H=1/2 (H={hu.value}, "
            f"band half-width {hu.eps_half}); use corr_gstar_half or quadrature"
        )
    st2 = sigma_constants(hu).sigma_tilde_sq
    return (st2 * corr_ch(hu, tau) - corr_rh(hu, tau)) / (st2 - 1.0)


# ---------------------------------------------------------------------------
# kernel-integral route
# ---------------------------------------------------------------------------


def _trunc_eps(spec: QuadratureSpec) -> float:
    return 0.25 * spec.abs_tol


def mh_cov_integral(H, tau: float, spec: QuadratureSpec | None = None) -> float:
    """int_0^infty K_0(s) K_tau(s) ds via s = e^x.

    The product K_0 K_tau has one sign (positive) for every H != 1/2, so the
    transformed integrand exp(log|K_0| + log|K_tau| + x) is exact.  Truncation
    bounds follow from  |K_0 K_tau| <= e^{-tau H} s^{2H-1}  near zero (H<1/2),
    the constant bound 2 e^{-tau/2} (H>=1/2), and the algebraic tail
    (H-1/2)^2 e^{tau(1-H)} s^{2H-3}.
    """
    h = as_hurst(H).value
    tau = _check_tau(tau)
    spec = spec or QuadratureSpec()
    if h == 0.5:
        return 0.0
    eps = _trunc_eps(spec)
    if h < 0.5:
        x_lo = (math.log(2.0 * h * eps) + tau * h) / (2.0 * h)
    else:
        x_lo = math.log(0.5 * eps)
    x_lo = min(x_lo, -5.0)
    x_hi = (
        math.log(eps * (2.0 - 2.0 * h))
        - 2.0 * math.log(abs(h - 0.5))
        - tau * (1.0 - h)
    ) / (2.0 * h - 2.0)
    x_hi = max(x_hi, tau + 5.0)

    def f(x):
        return math.exp(
            _log_k0_at_log(h, x) - 0.5 * tau + _log_k0_at_log(h, x - tau) + x
        )

    inner = QuadratureSpec(
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
        max_depth=spec.max_depth,
        split_points=(0.0, tau),
    )
    value, _ = integrate_adaptive(f, x_lo, x_hi, inner)
    return value


def mh_variance_integral(H, spec: QuadratureSpec | None = None) -> float:
    """int_0^infty K_0(s)^2 ds, the quadrature route to var_m1."""
    return mh_cov_integral(H, 0.0, spec)


@lru_cache(maxsize=256)
def _mh_denominator(hurst: Hurst, spec: QuadratureSpec) -> float:
    den = mh_variance_integral(hurst, spec)
    ref = sigma_constants(hurst).var_m1
    if abs(den - ref) > 1e-8:
        raise QuadratureError(
            f"normalizer cross-check failed at H={hurst.value}: quadrature "
            f"{den!r} vs closed form {ref!r}",
            value=den,
            error_estimate=abs(den - ref),
        )
    return den


def corr_gh_quad(H, tau: float, spec: QuadratureSpec | None = None) -> float:
    """Smooth-component correlation from the kernel integrals.

    The normalizer int K_0^2 is computed by the same engine (cached per H)
    and cross-checked against the closed-form var_m1 to 1e-8.
    """
    hu = as_hurst(H)
    tau = _check_tau(tau)
    spec = spec or QuadratureSpec()
    if hu.degenerate:
        raise DegenerateHurstError(
            f"normalizing constant vanishes near H=1/2 (H={hu.value}); "
            "use corr_gstar_half or a Hurst with smaller eps_half"
        )
    return mh_cov_integral(hu, tau, spec) / _mh_denominator(hu, spec)


def gstar_integral(tau: float, spec: QuadratureSpec | None = None) -> float:
    """int_0^infty log(1+1/u) log(1+e^tau/u) du via u = e^x.

    The logarithmic endpoint singularity becomes softplus(-x), smooth on the
    whole line; tails decay like x^2 e^x on the left and e^{tau-x} on the
    right.
    """
    tau = _check_tau(tau)
    spec = spec or QuadratureSpec()
    eps = _trunc_eps(spec)
    lne = abs(math.log(eps))
    x_lo = -lne - 2.0 * math.log(10.0 + tau + lne) - 5.0
    x_hi = tau + lne + 5.0

    def f(x):
        return _softplus(-x) * _softplus(tau - x) * math.exp(x)

    inner = QuadratureSpec(
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
        max_depth=spec.max_depth,
        split_points=(0.0, tau),
    )
    value, _ = integrate_adaptive(f, x_lo, x_hi, inner)
    return value


def corr_gstar_half(tau: float, spec: QuadratureSpec | None = None) -> float:
    """The H -> 1/2 limit correlation (3/pi^2) e^{-tau/2} * gstar_integral.

    Normalization uses int_0^infty log(1+1/u)^2 du = pi^2/3 exactly.
    """
    tau = _check_tau(tau)
    return 3.0 / (math.pi * math.pi) * math.exp(-0.5 * tau) * gstar_integral(tau, spec)


def young_tail_constant(spec: QuadratureSpec | None = None) -> float:
    """Explicit constant of the exponential tail bound for the limit correlation.

    C = (3/pi^2) (int log(1+1/u)^{3/2} du + int log(1+1/v)^3 dv), the constant
    produced by the Young-inequality step; the bound is
    corr_gstar_half(tau) <= C e^{-tau/6}.
    """
    spec = spec or QuadratureSpec()
    eps = _trunc_eps(spec)
    lne = abs(math.log(eps))

    def moment(p):
        x_lo = -lne - p * math.log(10.0 + lne) - 5.0
        x_hi = lne / (p - 1.0) + abs(math.log(p - 1.0)) / (p - 1.0) + 5.0

        def f(x):
            return _softplus(-x) ** p * math.exp(x)

        inner = QuadratureSpec(
            rel_tol=spec.rel_tol,
            abs_tol=spec.abs_tol,
            max_depth=spec.max_depth,
            split_points=(0.0,),
        )
        return integrate_adaptive(f, x_lo, x_hi, inner)[0]

    return 3.0 / (math.pi * math.pi) * (moment(1.5) + moment(3.0))


def selfsim_msd(H, t: float, t_prime: float, spec: QuadratureSpec | None = None) -> float:
    """E|M_t - M_{t'}|^2 = int_0^infty ((t+s)^{H-1/2} - (t'+s)^{H-1/2})^2 ds.

    The integrand is evaluated in log space through the stable difference
    (t'+s)^{H-1/2} expm1((H-1/2) log(1 + (t-t')/(t'+s))).
    """
    h = as_hurst(H).value
    spec = spec or QuadratureSpec()
    if t < t_prime:
        t, t_prime = t_prime, t
    if not (t_prime >= 0.0):
        raise DomainError("times must be >= 0")
    if t == t_prime:
        return 0.0
    if h == 0.5:
        return 0.0
    dt = t - t_prime
    eps = _trunc_eps(spec)
    hp = h - 0.5
    if t_prime == 0.0 and h < 0.5:
        x_lo = math.log(2.0 * h * eps) / (2.0 * h)
    else:
        d0 = abs(t**hp - t_prime**hp) if t_prime > 0.0 else t**hp
        x_lo = math.log(eps) - 2.0 * math.log(d0) if d0 > 0 else -50.0
    x_lo = min(x_lo, math.log(dt) - 5.0, -5.0)
    x_hi = (
        math.log(eps * (2.0 - 2.0 * h)) - 2.0 * math.log(abs(hp) * dt)
    ) / (2.0 * h - 2.0)
    x_hi = max(x_hi, math.log(max(t, 1.0)) + 5.0)
    log_tp = math.log(t_prime) if t_prime > 0.0 else None

    def f(x):
        # log|diff| = (H-1/2) log(t'+s) + log|expm1((H-1/2) log(1+dt/(t'+s)))|
        if log_tp is None:
            log_base = x
        else:
            log_base = x + _softplus(log_tp - x)
        z = _softplus(math.log(dt) - log_base)
        return math.exp(2.0 * (hp * log_base + _log_abs_expm1(hp * z)) + x)

    inner = QuadratureSpec(
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol,
        max_depth=spec.max_depth,
        split_points=(math.log(t),),
    )
    return integrate_adaptive(f, x_lo, x_hi, inner)[0]


def selfsim_tail_variance(H, t: float, s_max: float, spec: QuadratureSpec | None = None) -> float:
    """int_{s_max}^infty k_t(s)^2 ds, the truncated-tail variance at time t."""
    h = as_hurst(H).value
    spec = spec or QuadratureSpec()
    if t == 0.0:
        return 0.0
    if not (t > 0.0 and s_max > 0.0):
        raise DomainError("t and s_max must be positive")
    if h == 0.5:
        return 0.0
    eps = _trunc_eps(spec)
    log_t = math.log(t)
    x_lo = math.log(s_max)
    x_hi = (
        math.log(eps * (2.0 - 2.0 * h)) - 2.0 * math.log(abs(h - 0.5) * t)
    ) / (2.0 * h - 2.0)
    x_hi = max(x_hi, x_lo + 5.0)

    def f(x):
        return math.exp(2.0 * _log_kt_at_log(h, log_t, x) + x)

    return integrate_adaptive(f, x_lo, x_hi, spec)[0]


def mstar_tail_variance(t: float, s_max: float, spec: QuadratureSpec | None = None) -> float:
    """int_{s_max}^infty log(1+t/s)^2 ds for the log-kernel process."""
    spec = spec or QuadratureSpec()
    if t == 0.0:
        return 0.0
    if not (t > 0.0 and s_max > 0.0):
        raise DomainError("t and s_max must be positive")
    eps = _trunc_eps(spec)
    log_t = math.log(t)
    x_lo = math.log(s_max)
    x_hi = max(2.0 * log_t - math.log(eps) + 5.0, x_lo + 5.0)

    def f(x):
        return _softplus(log_t - x) ** 2 * math.exp(x)

    return integrate_adaptive(f, x_lo, x_hi, spec)[0]


# ---------------------------------------------------------------------------
# correlation-function objects
# ---------------------------------------------------------------------------


class CorrKind(Enum):
    CH = "ch"
    RH = "rh"
    GH_CLOSED = "gh"
    GH_QUAD = "gh-quad"
    GSTAR_HALF = "gstar"
    EXPONENTIAL = "exp"
    RESCALED = "rescaled"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CorrelationFn:
    """Immutable evaluator contract tau -> rho(tau).

    Hashable, so grid evaluations can be memoized (correlation_row); safe to
    share across threads.
    """

    kind: CorrKind
    hurst: Hurst | None = None
    rate: float | None = None
    kappa: float | None = None
    base: "CorrelationFn | None" = None
    quad: QuadratureSpec | None = None
    func: object | None = None

    def __call__(self, tau: float) -> float:
        k = self.kind
        if k is CorrKind.EXPONENTIAL:
            return math.exp(-self.rate * _check_tau(tau))
        if k is CorrKind.CH:
            return corr_ch(self.hurst, tau)
        if k is CorrKind.RH:
            return corr_rh(self.hurst, tau)
        if k is CorrKind.GH_CLOSED:
            return corr_gh_closed(self.hurst, tau)
        if k is CorrKind.GH_QUAD:
            return corr_gh_quad(self.hurst, tau, self.quad)
        if k is CorrKind.GSTAR_HALF:
            return corr_gstar_half(tau, self.quad)
        if k is CorrKind.RESCALED:
            return self.base(_check_tau(tau) / self.kappa)
        if k is CorrKind.CUSTOM:
            return self.func(tau)
        raise DomainError(f"unknown correlation kind {k!r}")

    def label(self) -> str:
        k = self.kind
        if k is CorrKind.EXPONENTIAL:
            return f"exp(rate={self.rate:g})"
        if k is CorrKind.RESCALED:
            return f"rescaled({self.base.label()},kappa={self.kappa:g})"
        if k is CorrKind.GSTAR_HALF:
            return "gstar"
        if k is CorrKind.CUSTOM:
            return "custom"
        return f"{k.value}(H={self.hurst.value:g})"


def corr_rescaled(base: CorrelationFn, kappa: float) -> CorrelationFn:
    """Time-rescaled correlation tau -> base(tau / kappa), kappa > 0."""
    if not (kappa > 0.0) or not math.isfinite(kappa):
        raise DomainError(f"kappa must be positive and finite, got {kappa!r}")
    return CorrelationFn(kind=CorrKind.RESCALED, base=base, kappa=float(kappa))


def make_correlation(kind, hurst=None, rate=1.0, quad=None, eps_half=None) -> CorrelationFn:
    """Factory from CLI-style names: exp, ch, rh, gh, gh-quad, gstar.

    For gh/gh-quad with Hurst in the degenerate band, routes to the
    half-limit correlation with a warning (the continuity theorem bounds the
    substitution error; see also the acceptance checks).
    """
    kind = CorrKind(kind) if not isinstance(kind, CorrKind) else kind
    if kind is CorrKind.EXPONENTIAL:
        if not (rate > 0.0):
            raise DomainError(f"exponential rate must be positive, got {rate!r}")
        return CorrelationFn(kind=kind, rate=float(rate))
    if kind is CorrKind.GSTAR_HALF:
        return CorrelationFn(kind=kind, quad=quad)
    if hurst is None:
        raise DomainError(f"correlation kind {kind.value!r} needs a Hurst parameter")
    hu = as_hurst(hurst, eps_half)
    if kind in (CorrKind.GH_CLOSED, CorrKind.GH_QUAD) and hu.degenerate:
        warnings.warn(
            f"H={hu.value} lies in the degenerate band (half-width "
            f"{hu.eps_half}); substituting the H=1/2 limit correlation",
            stacklevel=2,
        )
        return CorrelationFn(kind=CorrKind.GSTAR_HALF, quad=quad)
    if kind is CorrKind.GH_QUAD:
        return CorrelationFn(kind=kind, hurst=hu, quad=quad)
    return CorrelationFn(kind=kind, hurst=hu)


@lru_cache(maxsize=128)
def _row_cached(corr: CorrelationFn, step: float, n_points: int):
    row = np.array([corr(step * k) for k in range(n_points)])
    row.flags.writeable = False
    return row


def correlation_row(corr, step: float, n_points: int) -> np.ndarray:
    """rho(k * step) for k = 0..n_points-1, memoized per (corr, grid).

    Covariance assembly needs O(n) distinct values; the cache makes repeated
    builds (jitter retries, halving checks) free.  Custom callables are not
    cached since their identity does not pin their values.
    """
    if not (step > 0.0) or n_points < 1:
        raise DomainError("correlation_row needs step > 0 and n_points >= 1")
    if isinstance(corr, CorrelationFn) and corr.kind is not CorrKind.CUSTOM:
        return _row_cached(corr, float(step), int(n_points))
    return np.array([corr(step * k) for k in range(n_points)])
