import math

import numpy as np
import pytest

from persistgp import (
    DomainError,
    FitMode,
    InsufficientSurvivorsError,
    McSettings,
    SurvivalCurve,
    estimate_exponent,
    fit_exponent,
    make_correlation,
    rescaled_exponent,
    simulate_survival_curve,
    survival_curve_gsp,
    survival_curve_selfsimilar,
    wilson_interval,
)
from persistgp.sampler import PathBatch, SampleMethod, TimeGrid


def make_batch(values, step=1.0, times=None):
    values = np.asarray(values, dtype=float)
    grid = None if times is not None else TimeGrid(step=step, n_points=values.shape[1])
    return PathBatch(grid=grid, values=values, seed=0,
                     method=SampleMethod.DIRECT_KERNEL if times is not None
                     else SampleMethod.CHOLESKY,
                     times=times)


class TestWilson:
    def test_basic_properties(self):
        for k, n in [(0, 100), (1, 100), (50, 100), (99, 100), (100, 100)]:
            lo, hi = wilson_interval(k, n)
            p = k / n
            assert 0.0 <= lo <= p <= hi <= 1.0

    def test_small_probability_stability(self):
        lo, hi = wilson_interval(2, 200_000)
        assert lo > 0.0  # score interval keeps the floor positive for k >= 1


class TestSurvivalCurves:
    def test_constant_negative_paths_survive(self):
        batch = make_batch(np.full((50, 4), -1.0))
        curve = survival_curve_gsp(batch)
        assert np.all(curve.p_hat == 1.0)
        assert np.all(curve.ci_high <= 1.0)

    def test_constant_positive_paths_die(self):
        batch = make_batch(np.full((50, 4), 1.0))
        curve = survival_curve_gsp(batch)
        assert np.all(curve.p_hat == 0.0)

    def test_selfsimilar_levels(self):
        times = np.exp(np.arange(4) * 0.5)
        assert np.all(survival_curve_selfsimilar(make_batch(np.zeros((9, 4)), times=times)).p_hat == 1.0)
        assert np.all(survival_curve_selfsimilar(make_batch(np.full((9, 4), 2.0), times=times)).p_hat == 0.0)

    def test_counts_are_running_max_events(self):
        # one path that dips above 0 at step 2 only
        vals = np.array([[-1.0, -0.5, 0.5, -2.0]])
        curve = survival_curve_gsp(make_batch(vals))
        assert list(curve.survivors) == [1, 1, 0, 0]

    def test_off_grid_horizon_rejected(self):
        batch = make_batch(np.zeros((3, 5)), step=0.5)
        with pytest.raises(DomainError):
            survival_curve_gsp(batch, horizons=[0.7])

    def test_increasing_transform_invariance(self):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal((500, 8))
        base = survival_curve_gsp(make_batch(vals), level=0.0)
        f = lambda x: x**3 + x  # strictly increasing, f(0) = 0
        transformed = survival_curve_gsp(make_batch(f(vals)), level=f(0.0))
        assert np.array_equal(base.survivors, transformed.survivors)
        times = np.exp(np.arange(8) * 0.5)
        base_ss = survival_curve_selfsimilar(make_batch(vals, times=times), level=1.0)
        g = lambda x: np.expm1(x)  # strictly increasing, g(1) maps the level
        tr_ss = survival_curve_selfsimilar(make_batch(g(vals), times=times),
                                           level=float(np.expm1(1.0)))
        assert np.array_equal(base_ss.survivors, tr_ss.survivors)

    def test_monotone_survivors_enforced(self):
        with pytest.raises(DomainError):
            SurvivalCurve(horizons=np.array([1.0, 2.0]), survivors=np.array([3, 5]),
                          n_paths=10)


class TestFitExponent:
    @staticmethod
    def synthetic_curve(fn, horizons, n=10**9):
        surv = np.array([int(round(n * fn(T))) for T in horizons])
        return SurvivalCurve(horizons=np.asarray(horizons, dtype=float),
                             survivors=surv, n_paths=n)

    def test_exact_exponential_decay(self):
        horizons = np.arange(1, 21) * 0.5
        curve = self.synthetic_curve(lambda T: math.exp(-0.5 * T), horizons)
        est = fit_exponent(curve, FitMode.STATIONARY_LOG_T)
        assert est.theta_hat == pytest.approx(0.5, abs=1e-6)
        assert est.r_squared > 1.0 - 1e-9
        assert est.two_point_slope == pytest.approx(0.5, abs=1e-6)

    def test_exact_power_decay_loglog(self):
        horizons = np.exp(np.arange(1, 21) * 0.4)
        curve = self.synthetic_curve(lambda T: 0.8 * T ** (-0.75), horizons)
        est = fit_exponent(curve, FitMode.SELF_SIMILAR_LOG_LOG)
        assert est.theta_hat == pytest.approx(0.75, abs=1e-6)
        assert est.r_squared > 1.0 - 1e-9

    def test_zero_survivor_horizons_excluded(self):
        horizons = np.arange(1, 11) * 1.0
        surv = np.array([900, 800, 700, 600, 500, 400, 300, 200, 0, 0])
        curve = SurvivalCurve(horizons=horizons, survivors=surv, n_paths=1000)
        est = fit_exponent(curve, window=(1.0, 10.0))
        assert est.theta_hat > 0.0

    def test_all_dead_window_raises(self):
        horizons = np.arange(1, 5) * 1.0
        surv = np.array([10, 5, 0, 0])
        curve = SurvivalCurve(horizons=horizons, survivors=surv, n_paths=100)
        with pytest.raises(InsufficientSurvivorsError):
            fit_exponent(curve, window=(3.0, 4.0))

    def test_flat_curve_raises(self):
        horizons = np.arange(1, 6) * 1.0
        curve = SurvivalCurve(horizons=horizons, survivors=np.full(5, 70), n_paths=100)
        with pytest.raises(InsufficientSurvivorsError):
            fit_exponent(curve)

    def test_default_window_drops_first_30_percent(self):
        horizons = np.arange(1, 11) * 1.0
        curve = self.synthetic_curve(lambda T: math.exp(-T), horizons, n=10**12)
        est = fit_exponent(curve)
        assert est.window[0] == pytest.approx(horizons[2])  # floor(0.3*9) = 2
        assert est.window[1] == pytest.approx(10.0)


class TestMonteCarloPipelines:
    def test_ou_ratio_and_slope(self, rng_seed):
        # exponential correlation: continuous exponent 1; at this grid the
        # ratio -log p(T)/T at T = 10 sits well inside [0.85, 1.15]
        mc = McSettings(step=0.05, horizon=10.0, n_paths=50_000, seed=rng_seed)
        curve, est = estimate_exponent(make_correlation("exp", rate=1.0), mc)
        k10 = int(np.argmin(np.abs(curve.horizons - 10.0)))
        ratio = -math.log(curve.p_hat[k10]) / 10.0
        assert 0.85 <= ratio <= 1.15
        assert 0.80 <= est.theta_hat <= 1.0
        assert est.stderr > est.stderr_wls  # jackknife sees the path sharing

    def test_rescaled_exponential(self, rng_seed):
        # corr e^{-tau/2} via kappa = 2: exponent 1/2 within +-0.08
        mc = McSettings(step=0.05, horizon=10.0, n_paths=100_000, seed=rng_seed)
        est = rescaled_exponent(make_correlation("exp", rate=1.0), 2.0, mc)
        assert est.kappa == 2.0
        assert abs(est.theta_hat - 0.5) <= 0.08

    def test_rescaled_gh_ladders_run(self, rng_seed):
        mc = McSettings(step=0.1, horizon=8.0, n_paths=20_000, seed=rng_seed)
        low = rescaled_exponent(make_correlation("gh", hurst=0.1), 0.1, mc)
        assert low.theta_hat > 0.0 and math.isfinite(low.stderr)

    def test_window_stability_smooth_case(self, rng_seed):
        # nested windows: doubling T_lo moves theta by < 2 joint stderr
        mc = McSettings(step=0.05, horizon=10.0, n_paths=100_000, seed=rng_seed)
        curve = simulate_survival_curve(make_correlation("gh", hurst=0.3), mc)
        a = fit_exponent(curve, window=(3.0, 10.0))
        b = fit_exponent(curve, window=(6.0, 10.0))
        joint = math.hypot(a.stderr, b.stderr)
        assert abs(a.theta_hat - b.theta_hat) < 2 * joint

    def test_step_halving_stability_smooth_case(self, rng_seed):
        # smooth correlation: halving the step moves p_hat by less than the
        # 95% CI width at matching horizons
        corr = make_correlation("gh", hurst=0.3)
        mc1 = McSettings(step=0.1, horizon=8.0, n_paths=50_000, seed=rng_seed)
        mc2 = McSettings(step=0.05, horizon=8.0, n_paths=50_000, seed=rng_seed + 1)
        c1 = simulate_survival_curve(corr, mc1)
        c2 = simulate_survival_curve(corr, mc2)
        idx2 = {round(T, 10): i for i, T in enumerate(c2.horizons)}
        for i, T in enumerate(c1.horizons):
            j = idx2[round(T, 10)]
            width = c1.ci_high[i] - c1.ci_low[i] + (c2.ci_high[j] - c2.ci_low[j])
            assert abs(c1.p_hat[i] - c2.p_hat[j]) < width

    def test_determinism_across_threads(self, rng_seed):
        corr = make_correlation("exp", rate=1.0)
        mc1 = McSettings(step=0.1, horizon=6.0, n_paths=30_000, seed=rng_seed, threads=1)
        mc4 = McSettings(step=0.1, horizon=6.0, n_paths=30_000, seed=rng_seed, threads=4)
        c1 = simulate_survival_curve(corr, mc1)
        c4 = simulate_survival_curve(corr, mc4)
        assert np.array_equal(c1.survivors, c4.survivors)

    def test_step_guard(self):
        with pytest.raises(DomainError):
            simulate_survival_curve(make_correlation("exp"),
                                    McSettings(step=0.5, horizon=5.0, n_paths=100))


@pytest.mark.acceptance
class TestScalingLawInvariant:
    """Exponential(rate lambda): fitted theta/lambda across lambda in {0.5, 1, 2}.

    The stated target window is [0.9, 1.1] at the acceptance budget.  The
    fitted slope estimates the discrete-sup exponent of the lambda-rate
    process at step 0.05, which is below the continuous-time rate by an
    amount that grows with lambda (effective grid lambda*step); the lambda=2
    case sits near 0.80 for every seed, so the stated window cannot hold
    there.  The checks are asserted as stated; see the decisions ledger.
    """

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_scaling_law(self, lam, rng_seed):
        mc = McSettings(step=0.05, horizon=10.0 / lam, n_paths=200_000, seed=rng_seed)
        _, est = estimate_exponent(make_correlation("exp", rate=lam), mc)
        ratio = est.theta_hat / lam
        print(f"[invariant] exponential rate {lam}: theta_hat/lambda = {ratio:.4f}")
        assert 0.9 <= ratio <= 1.1
