from Intermittency.data import ProcessModel, make_arithmetic_grid, make_geometric_grid
from Intermittency.ensemble import simulate_ensemble
from Intermittency.estimator import detect_intermittency, estimate_scaling_function
from Intermittency.supou import (CharacteristicQuadruple, LevyDriverSpec,
                                 MixingSpec, SupOU, SupOUSimConfig, correlation,
                                 exact_variance, integrate_path, sample_mixing,
                                 simulate_integrated_supou, simulate_ou_path,
                                 simulate_supou, supou_scenario, theoretical_H,
                                 variance_constant)
from Intermittency.utils import spawn_replication_rng
from tests.config import supou_gaussian, supou_jumps
import numpy as np
import pytest
import scipy.integrate


GAUSSIAN = CharacteristicQuadruple(b_gauss=1.0, pi=MixingSpec(0.5))
JUMPS = CharacteristicQuadruple(levy_measure=LevyDriverSpec(1.0, jump_mean=1.0),
                                pi=MixingSpec(0.5))


if supou_gaussian and supou_jumps:
    pass


##############
# PARAMETERS #
##############


def test_mixing_spec():
    """Tests Gamma mixing validation, its cdf and the correlation."""
    pi = MixingSpec(0.5, rate=2.0)
    assert pi.cdf(0.0) == 0.0
    assert pi.cdf(1e9) == pytest.approx(1.0)
    assert correlation(pi, 6.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        MixingSpec(0.0)
    with pytest.raises(ValueError):
        MixingSpec(0.5, family='pareto')


def test_sample_mixing_moments():
    """Tests that decay rates follow Gamma(alpha, rate)."""
    xi = sample_mixing(MixingSpec(0.5, rate=2.0), 100000, spawn_replication_rng(0, 0))
    assert np.mean(xi) == pytest.approx(0.25, rel=0.02)


def test_driver_spec():
    """Tests the jump driver summaries."""
    driver = LevyDriverSpec(2.0, jump_mean=0.5, p_plus=1.0)
    assert driver.tag == 'compound_poisson_exp'
    assert driver.mean_jump == 0.5
    assert driver.variance_rate == 1.0
    assert driver.scaled(0.5).intensity == 1.0
    with pytest.raises(ValueError):
        LevyDriverSpec(-1.0)
    with pytest.raises(ValueError):
        LevyDriverSpec(1.0, p_plus=1.5)


def test_quadruple_needs_a_driver():
    with pytest.raises(ValueError):
        CharacteristicQuadruple()
    assert JUMPS.second_cumulant == 2.0
    assert not JUMPS.is_gaussian


def test_config_validation():
    grid = make_geometric_grid(10, 10, 3)
    with pytest.raises(ValueError):
        SupOUSimConfig(GAUSSIAN, grid, m_components=0)
    with pytest.raises(ValueError):
        SupOUSimConfig(GAUSSIAN, grid, burn_in='forever')
    with pytest.raises(ValueError):
        SupOUSimConfig(GAUSSIAN, grid, burn_in=-1.0)


##########
# THEORY #
##########


def test_theoretical_H_cases():
    """Tests the four limit cases and their boundaries."""
    assert theoretical_H(GAUSSIAN) == (0.75, 'i', 'fbm')
    assert theoretical_H(JUMPS).H == pytest.approx(2 / 3)
    assert theoretical_H(JUMPS, beta_bg=1.8).H == pytest.approx(1 - 0.5 / 1.8)
    assert theoretical_H(JUMPS, alpha=1.5).case == 'iv'
    with pytest.raises(ValueError):
        theoretical_H(JUMPS, beta_bg=1.5)
    with pytest.raises(ValueError):
        theoretical_H(JUMPS, alpha=1.0)
    with pytest.raises(ValueError):
        theoretical_H(JUMPS, beta_bg=1.8, gamma_opt=1.7)


def test_supou_scenarios():
    """Tests the scenario picked for each driver."""
    assert supou_scenario(GAUSSIAN).tag == 'gaussian_supou'
    assert supou_scenario(JUMPS).tag == 'supou_finite_var'
    assert supou_scenario(JUMPS, gamma=1.8).tag == 'supou_inf_var_i'
    assert supou_scenario(JUMPS, beta_bg=1.6, gamma=1.9).tag == 'supou_inf_var_ii'


def test_exact_variance_matches_quadrature():
    """Tests the closed form of Var X(t) against numerical integration."""
    for quadruple in (GAUSSIAN, JUMPS):
        for t in (1.0, 50.0, 1000.0):
            integral, _ = scipy.integrate.quad(
                lambda w: (t - w) * correlation(quadruple.pi, w), 0, t, epsrel=1e-11)
            expected = quadruple.second_cumulant * integral
            assert exact_variance(quadruple, t) == pytest.approx(expected, rel=1e-7)


def test_variance_constant_is_the_limit():
    """Tests Var X(t) / t^{2 - alpha} -> variance_constant."""
    c = variance_constant(GAUSSIAN)
    assert c == pytest.approx(1 / (1.5 * 0.5))
    assert exact_variance(GAUSSIAN, 1e10) / 1e10 ** 1.5 == pytest.approx(c, rel=1e-3)
    with pytest.raises(ValueError):
        variance_constant(CharacteristicQuadruple(b_gauss=1.0, pi=MixingSpec(1.5)))


############
# SAMPLING #
############


def test_ou_stationary_variance():
    """Tests Var V = (b + jump variance) / (2 xi) without time change."""
    grid = make_arithmetic_grid(1.0, 20)
    driver = LevyDriverSpec(2.0, jump_mean=0.5)
    paths = np.array([simulate_ou_path(0.5, driver, 1.0, grid, spawn_replication_rng(3, r))
                      for r in range(4000)])
    for column in (0, -1):
        assert np.var(paths[:, column]) == pytest.approx(2.0, rel=0.1)
        assert np.mean(paths[:, column]) == pytest.approx(0.0, abs=0.1)


def test_ou_burn_in_warns():
    """Tests the warning when burn-in cannot reach stationarity."""
    grid = make_arithmetic_grid(1.0, 5)
    with pytest.warns(RuntimeWarning):
        simulate_ou_path(0.01, LevyDriverSpec(), 1.0, grid, spawn_replication_rng(0, 0),
                         burn_in=10.0)
    with pytest.raises(ValueError):
        simulate_ou_path(0.0, LevyDriverSpec(), 1.0, grid, spawn_replication_rng(0, 0))


def test_gaussian_supou_variance():
    """Tests Var X(1000) against its closed form, Gaussian driver."""
    config = SupOUSimConfig(GAUSSIAN, make_geometric_grid(10, 10, 3), m_components=1000)
    x = np.array([simulate_integrated_supou(config, spawn_replication_rng(7, r))
                  for r in range(4000)])
    for j, t in enumerate((10.0, 100.0, 1000.0)):
        assert np.var(x[:, j]) == pytest.approx(exact_variance(GAUSSIAN, t), rel=0.1)


def test_jump_supou_variance():
    """Tests Var X(t) against its closed form, compound Poisson driver."""
    config = SupOUSimConfig(JUMPS, make_geometric_grid(10, 10, 2), m_components=200)
    x = np.array([simulate_integrated_supou(config, spawn_replication_rng(8, r))
                  for r in range(4000)])
    assert np.mean(x[:, 1]) == pytest.approx(0.0, abs=4 * np.std(x[:, 1]) / np.sqrt(4000))
    assert np.var(x[:, 1]) == pytest.approx(exact_variance(JUMPS, 100.0), rel=0.15)


def test_ou_lag_autocorrelation():
    """Tests corr(V(0), V(u)) = exp(-xi u) with jumps and a Brownian part."""
    grid = make_arithmetic_grid(1.0, 3)
    driver = LevyDriverSpec(2.0, jump_mean=0.5)
    v = np.array([simulate_ou_path(0.5, driver, 1.0, grid, spawn_replication_rng(4, r),
                                   include_origin=True) for r in range(10000)])
    for u in (1, 2, 3):
        rho = np.corrcoef(v[:, 0], v[:, u])[0, 1]
        assert rho == pytest.approx(np.exp(-0.5 * u), abs=0.05)


def test_fast_ou_decorrelates():
    """Tests that V forgets its start within one step when xi * step > 4."""
    grid = make_arithmetic_grid(1.0, 1)
    v = np.array([simulate_ou_path(5.0, LevyDriverSpec(), 1.0, grid,
                                   spawn_replication_rng(5, r), include_origin=True)
                  for r in range(10000)])
    assert abs(np.corrcoef(v[:, 0], v[:, 1])[0, 1]) < 0.05


def test_supou_correlation():
    """Tests corr(Y(0), Y(u)) against (1 + u)^-alpha, Gaussian driver."""
    config = SupOUSimConfig(GAUSSIAN, make_arithmetic_grid(1.0, 10), m_components=1000)
    y = np.array([simulate_supou(config, spawn_replication_rng(9, r), include_origin=True)
                  for r in range(3000)])
    for u in (1, 5, 10):
        rho = np.corrcoef(y[:, 0], y[:, u])[0, 1]
        assert rho == pytest.approx((1 + u) ** -0.5, abs=0.05)
        assert correlation(GAUSSIAN.pi, u) == pytest.approx((1 + u) ** -0.5)


def test_superposition_consistency():
    """Tests that Y keeps its law when m doubles and every component carries
    half the cumulant."""
    grid = make_arithmetic_grid(1.0, 5)
    stats = []
    for m in (500, 1000):
        config = SupOUSimConfig(JUMPS, grid, m_components=m)
        y = np.array([simulate_supou(config, spawn_replication_rng(m, r),
                                     include_origin=True) for r in range(10000)])
        stats.append((np.var(y[:, 0]), np.corrcoef(y[:, 0], y[:, 5])[0, 1]))
    (var_half, rho_half), (var_full, rho_full) = stats
    assert var_half == pytest.approx(JUMPS.second_cumulant / 2, rel=0.15)
    assert var_full == pytest.approx(var_half, rel=0.15)
    assert rho_full == pytest.approx(rho_half, abs=0.05)
    assert rho_full == pytest.approx(correlation(JUMPS.pi, 5), abs=0.05)


def test_integrate_path():
    """Tests the trapezoidal rule, exact for linear Y."""
    grid = make_arithmetic_grid(0.5, 4)
    y = np.concatenate([[0.0], grid.t_values])
    assert integrate_path(y, grid).tolist() == [0.125, 0.5, 1.125, 2.0]
    with pytest.raises(ValueError):
        integrate_path(grid.t_values, grid)


def test_supou_path_and_drift():
    """Tests that the drift shifts Y and tilts X."""
    grid = make_arithmetic_grid(1.0, 8)
    quadruple = CharacteristicQuadruple(a_drift=3.0, b_gauss=1.0)
    centered = CharacteristicQuadruple(b_gauss=1.0)
    y = simulate_supou(SupOUSimConfig(quadruple, grid, 10), spawn_replication_rng(0, 0))
    y0 = simulate_supou(SupOUSimConfig(centered, grid, 10), spawn_replication_rng(0, 0))
    assert np.allclose(y - y0, 3.0)
    x = simulate_integrated_supou(SupOUSimConfig(quadruple, grid, 10),
                                  spawn_replication_rng(0, 0))
    x0 = simulate_integrated_supou(SupOUSimConfig(centered, grid, 10),
                                   spawn_replication_rng(0, 0))
    assert np.allclose(x - x0, 3.0 * grid.t_values)


#################
# INTERMITTENCY #
#################


def test_jump_supou_is_intermittent(supou_jumps):
    """Tests that tau-hat(q)/q increases past alpha/(1 - H) and that the
    upper segment has slope near 1."""
    est = estimate_scaling_function(supou_jumps)
    H = theoretical_H(JUMPS).H
    beyond = est.q_grid >= 0.5 / (1 - H) - 1e-9
    ratio = est.tau_hat[beyond] / est.q_grid[beyond]
    assert len(ratio) >= 5
    assert np.all(np.diff(ratio) > 0)
    verdict = detect_intermittency(est)
    assert verdict.intermittent
    assert verdict.slopes[-1] == pytest.approx(1.0, abs=0.15)


def test_gaussian_supou_is_not_intermittent(supou_gaussian):
    """Tests that the Brownian driver gives a single line."""
    verdict = detect_intermittency(estimate_scaling_function(supou_gaussian))
    assert not verdict.intermittent
    assert verdict.breakpoint is None


#########
# MODEL #
#########


def test_supou_model():
    """Tests the registered model, its descriptor and integration modes."""
    model = SupOU(0.5, b_gauss=1.0, m_components=20)
    assert ProcessModel.from_dict(model.to_dict()) == model
    ensemble = simulate_ensemble(model, make_geometric_grid(10, 10, 3), 3, seed=1)
    assert ensemble.values.shape == (3, 3)
    trapezoid = SupOU(0.5, b_gauss=1.0, m_components=20, integration='trapezoid')
    with pytest.raises(ValueError):
        trapezoid.validate_grid(make_geometric_grid(10, 10, 3))
    path = trapezoid.simulate(make_arithmetic_grid(1.0, 10), spawn_replication_rng(0, 0))
    assert path.shape == (10,)
    with pytest.raises(ValueError):
        SupOU(0.5, b_gauss=1.0, integration='simpson')
    with pytest.raises(ValueError):
        SupOU(0.5)
