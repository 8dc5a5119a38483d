from Intermittency.scenarios import (ScenarioSpec, gaussian_rate_function,
                                     intermittency_of, negative_q_bound,
                                     tau_all_moments, tau_biscale,
                                     tau_finite_window, tau_gaussian_supou,
                                     tau_star_biscale, tau_star_finite_window,
                                     tau_star_supou_finite_var,
                                     tau_star_supou_inf_var, tau_supou_finite_var,
                                     tau_supou_inf_var, tau_triscale)
from Intermittency.utils import INF
import math
import pytest


##########################
# SELF-SIMILAR SCENARIOS #
##########################


def test_all_moments():
    """Tests tau(q) = Hq and its single-point conjugate."""
    assert tau_all_moments(0.625)(2) == 1.25
    assert not intermittency_of(tau_all_moments(0.625))[0]
    star = ScenarioSpec('all_moments', H=0.5).tau_star()
    assert star(0.5) == 0
    assert star(0.500001) == INF
    assert star.exposed_points == (0.5,)


def test_finite_window():
    """Tests the finite-moment-window scenario and its V-shaped conjugate."""
    tau = tau_finite_window(0.625, -1, 3)
    assert tau(-1) == -0.625
    assert tau(3.5) == INF
    star = tau_star_finite_window(0.625, -1, 3)
    assert star(0.625) == 0
    assert star(1.625) == pytest.approx(3.0)
    assert star(-0.375) == pytest.approx(1.0)
    assert star.exposed_points == (0.625,)
    with pytest.raises(ValueError):
        tau_finite_window(0.5, 0.5, 3)


########################
# MULTISCALE SCENARIOS #
########################


def test_biscale():
    """Tests the biscale breakpoint a/(b - H) and the segment conjugate."""
    tau = tau_biscale(0.6, 1, 0.5)
    assert tau.knots == (1.25,)
    assert tau(1) == pytest.approx(0.6)
    assert tau(2) == pytest.approx(1.5)
    star = tau_star_biscale(0.6, 1, 0.5)
    assert star(0.6) == 0
    assert star(1.0) == pytest.approx(0.5)
    assert star(0.5) == INF and star(1.05) == INF
    assert star.exposed_points == (0.6, 1.0)
    assert intermittency_of(tau) == (True, (1.0, 2.0))


def test_biscale_rejects_unordered_scales():
    with pytest.raises(ValueError):
        tau_biscale(1.0, 0.6, 0.5)
    with pytest.raises(ValueError):
        tau_biscale(0.6, 1.0, 0.0)


def test_triscale_matches_biscale():
    """Tests that the intermediate scale is invisible to tau."""
    assert tau_triscale(0.6, 1, 0.5) == tau_biscale(0.6, 1, 0.5)


def test_negative_q_bound():
    """Tests tau(q) >= q inf tau(q')/q' for q < 0."""
    tau = tau_finite_window(0.625, -1, 3)
    assert negative_q_bound(tau, -1) == -0.625
    assert negative_q_bound(tau_biscale(0.6, 1, 0.5), -2) == pytest.approx(-1.2)
    with pytest.raises(ValueError):
        negative_q_bound(tau, 1)


###################
# SUPOU SCENARIOS #
###################


def test_supou_finite_variance():
    """Tests the breakpoint alpha/(1 - H) and the lower envelope left of H."""
    tau = tau_supou_finite_var(2 / 3, 0.5)
    assert tau.partial
    assert tau.knots == pytest.approx((1.5,))
    assert tau(3) == pytest.approx(2.5)
    star = tau_star_supou_finite_var(2 / 3, 0.5)
    assert star(1.0) == pytest.approx(0.5)
    assert star(1.01) == INF
    assert {2 / 3, 1.0} <= set(star.exposed_points)
    assert star.is_lower_envelope(0.3)


def test_supou_infinite_variance_cases():
    """Tests both infinite-variance cases against their closed forms."""
    tau = tau_supou_inf_var('I', 0.5, 0.0, 1.8)
    assert tau.hi == 1.8
    assert tau(1.8) == pytest.approx(1.3)
    star = tau_star_supou_inf_var('I', 0.5, 0.0, 1.8)
    assert star(1.0) == pytest.approx(0.5)
    tau = tau_supou_inf_var('II', 0.5, 1.6, 1.9)
    assert tau(1.6) == pytest.approx((1 - 0.5 / 1.6) * 1.6)
    assert tau(1.9) == pytest.approx(1.4)
    star = tau_star_supou_inf_var('II', 0.5, 1.6, 1.9)
    assert star(1 - 0.5 / 1.6) == pytest.approx(0.0)
    assert star(1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        tau_supou_inf_var('I', 0.5, 1.6, 1.8)
    with pytest.raises(ValueError):
        tau_supou_inf_var('III', 0.5, 0.0, 1.8)


def test_gaussian_supou():
    """Tests that Gaussian supOU has no intermittency."""
    tau = tau_gaussian_supou(1.0, 0.5)
    assert tau(2) == 1.5
    assert tau(-1) == -0.75
    assert tau(-1.5) == INF
    assert not intermittency_of(tau)[0]


def test_gaussian_rate_function():
    """Tests the quadratic rate function and its conjugate cumulant."""
    rate = gaussian_rate_function(1.0, 0.5)
    sigma2 = math.gamma(1.5) / (1.5 * 0.5)
    assert rate.sigma_tilde_sq == pytest.approx(sigma2)
    assert rate(1.0) == pytest.approx(1 / (2 * sigma2))
    assert rate.conjugate()(2.0) == pytest.approx(sigma2 * 2.0)


#################
# SCENARIO SPEC #
#################


def test_scenario_spec_round_trip():
    """Tests descriptor round trips and parameter validation."""
    spec = ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5)
    assert ScenarioSpec.from_dict(spec.to_dict()) == spec
    assert spec.tau() == tau_biscale(0.6, 1.0, 0.5)
    with pytest.raises(ValueError):
        ScenarioSpec('biscale', H=0.6, b=1.0)
    with pytest.raises(ValueError):
        ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5, c=1)
    with pytest.raises(ValueError):
        ScenarioSpec('quadscale', H=0.6)


def test_scenario_spec_supou_hurst():
    """Tests that supOU scenarios only accept limit exponents."""
    ScenarioSpec('supou_finite_var', H=2 / 3, alpha=0.5)
    with pytest.raises(ValueError):
        ScenarioSpec('supou_finite_var', H=0.9, alpha=0.5)


def test_scaling_functions_are_valid():
    """Tests tau(0) = 0, convexity and monotone tau(q)/q for every scenario."""
    specs = [ScenarioSpec('all_moments', H=0.6),
             ScenarioSpec('finite_window', H=0.625, q_lo=-1, q_hi=3),
             ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5),
             ScenarioSpec('triscale', H=0.6, b=1.0, a=0.5),
             ScenarioSpec('supou_finite_var', H=2 / 3, alpha=0.5),
             ScenarioSpec('supou_inf_var_i', alpha=0.5, gamma=1.8),
             ScenarioSpec('supou_inf_var_ii', alpha=0.5, beta=1.6, gamma=1.9),
             ScenarioSpec('gaussian_supou', b_gauss=1.0, alpha=0.5)]
    for spec in specs:
        tau = spec.tau()
        assert tau(0) == 0
        assert list(tau.slopes) == sorted(tau.slopes)
        qs = [q for q in (0.25, 0.5, 1, 1.5, 2, 2.5, 3) if tau(q) < INF]
        ratios = [tau.ratio(q) for q in qs]
        assert all(b >= a - 1e-12 for a, b in zip(ratios, ratios[1:]))
