from Intermittency.data import PathEnsemble, make_arithmetic_grid, make_geometric_grid
from Intermittency.ensemble import simulate_ensemble
from Intermittency.estimator import (ScalingEstimate, detect_intermittency, diagnose,
                                     effective_fraction, empirical_moment,
                                     estimate_scaling_function)
from Intermittency.models import PowerLaw
from Intermittency.scenarios import tau_biscale
from tests.config import biscale, triscale
import csv
import numpy as np
import pytest


Q_GRID = np.arange(0, 3.01, 0.25)


if biscale or triscale:
    pass


@pytest.fixture
def power_law():
    """Ensemble of X(t) = t^0.5 over three decades"""
    return simulate_ensemble(PowerLaw(0.5), make_geometric_grid(10, 10, 4), 4, seed=0)


###########
# MOMENTS #
###########


def test_moment_of_order_zero(power_law):
    """Tests that q = 0 gives 1 without touching the data."""
    estimate = empirical_moment(power_law, 0, 2)
    assert (estimate.value, estimate.stderr, estimate.t) == (1.0, 0.0, 1000.0)


def test_moment_overflow():
    """Tests that moments beyond double precision raise instead of giving inf."""
    grid = make_geometric_grid(10, 10, 3)
    ensemble = PathEnsemble(PowerLaw(0.5), grid, np.full((2, 3), 1e300), seed=0)
    assert empirical_moment(ensemble, 1, 0).value == pytest.approx(1e300)
    with pytest.raises(OverflowError):
        empirical_moment(ensemble, 2, 0)


def test_negative_moment_at_zero():
    """Tests that negative orders are undefined when X(t) = 0."""
    grid = make_geometric_grid(10, 10, 3)
    ensemble = PathEnsemble(PowerLaw(0.5), grid, np.zeros((2, 3)), seed=0)
    assert empirical_moment(ensemble, 2, 0).value == 0.0
    with pytest.raises(ValueError):
        empirical_moment(ensemble, -1, 0)


def test_effective_fraction_shrinks_with_q(biscale):
    """Tests that high orders are carried by the few switched paths."""
    last = len(biscale.grid) - 1
    assert effective_fraction(biscale, 0.25, last) > 0.9
    assert effective_fraction(biscale, 3, last) < 0.01


#####################
# SCALING ESTIMATES #
#####################


def test_power_law_is_exact(power_law):
    """Tests tau-hat = Hq with a perfect fit on a deterministic path."""
    est = estimate_scaling_function(power_law, [-1, 0, 1, 2])
    assert est.tau_hat.tolist() == pytest.approx([-0.5, 0.0, 0.5, 1.0])
    assert est.r_squared == pytest.approx(1.0)
    assert est.t_range == (10.0, 10000.0)


def test_biscale_recovery(biscale):
    """Tests tau-hat against max(Hq, bq - a) on the biscale ensemble."""
    est = estimate_scaling_function(biscale, Q_GRID)
    tau = tau_biscale(0.6, 1.0, 0.5)
    assert np.abs(est.tau_hat - tau(Q_GRID)).max() <= 0.05
    assert est.tau_hat[Q_GRID == 2][0] == pytest.approx(1.5, abs=0.05)
    assert not [d for d in diagnose(est) if d.kind == 'convexity']


def test_triscale_matches_biscale(triscale):
    """Tests that the intermediate scale leaves tau-hat unchanged."""
    est = estimate_scaling_function(triscale, Q_GRID)
    assert np.abs(est.tau_hat - tau_biscale(0.6, 1.0, 0.5)(Q_GRID)).max() <= 0.05


def test_window_rows_are_na(power_law):
    """Tests that orders outside the moment window warn and give NaN."""
    with pytest.warns(RuntimeWarning):
        est = estimate_scaling_function(power_law, [0, 1, 2, 3], window=(0, 2))
    assert np.isnan(est.tau_hat[3])
    assert est.finite.tolist() == [True, True, True, False]


def test_estimator_needs_enough_times(power_law):
    """Tests the minimum number of times and decades."""
    with pytest.raises(ValueError):
        estimate_scaling_function(power_law, [1], t_indices=[0, 1])
    short = simulate_ensemble(PowerLaw(0.5), make_geometric_grid(10, 2, 4), 1, seed=0)
    with pytest.raises(ValueError):
        estimate_scaling_function(short, [1])


def test_long_grids_are_thinned():
    """Tests that grids over 50 times are thinned to quarter decades."""
    ensemble = simulate_ensemble(PowerLaw(0.5), make_arithmetic_grid(1, 1000), 1, seed=0)
    est = estimate_scaling_function(ensemble, [1])
    assert len(est.t_values) == 13


def test_to_csv(power_law, tmpdir):
    """Tests the CSV columns and the q = 0 row."""
    path = str(tmpdir.join('tau.csv'))
    with pytest.warns(RuntimeWarning):
        est = estimate_scaling_function(power_law, [0, 1, 4], window=(0, 2))
    est.to_csv(path, tau_theory=lambda q: 0.5 * q)
    with open(path) as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ['q', 'tau_hat', 'stderr', 'r_squared', 'tau_theory']
    assert rows[1] == ['0', '0', '0', '1', '0']
    assert rows[3][1:4] == ['NA', 'NA', 'NA']


###############
# DIAGNOSTICS #
###############


def _estimate(tau_hat, stderr=0.01):
    q = np.arange(len(tau_hat), dtype=float)
    n = len(q)
    return ScalingEstimate(q, np.asarray(tau_hat, dtype=float), np.full(n, stderr),
                           np.ones(n), np.array([10.0, 1e4]), np.ones(n), 100)


def test_diagnose_clean_and_noisy():
    """Tests that violations within two standard errors are tolerated."""
    assert diagnose(_estimate([0, 0.5, 1.0, 1.6])) == []
    assert diagnose(_estimate([0, 0.5, 0.98, 1.6], stderr=0.05)) == []
    kinds = [d.kind for d in diagnose(_estimate([0, 0.5, 0.8, 1.6]))]
    assert kinds == ['monotonicity', 'convexity']


def test_repair():
    """Tests that repair restores convexity and keeps tau(0) = 0."""
    est = _estimate([0, 0.5, 0.8, 1.6]).repaired()
    assert est.tau_hat.tolist() == pytest.approx([0, 0.4, 0.8, 1.6])
    assert diagnose(est) == []


#################
# INTERMITTENCY #
#################


def test_detect_intermittency(biscale):
    """Tests the two slopes and breakpoint found on the biscale ensemble."""
    verdict = detect_intermittency(estimate_scaling_function(biscale, Q_GRID))
    assert verdict.intermittent
    assert verdict.slopes == pytest.approx((0.6, 1.0), abs=0.05)
    assert 1.1 <= verdict.breakpoint <= 1.4
    lo, hi = verdict.breakpoint_band
    assert lo <= verdict.breakpoint <= hi
    assert verdict.consistent


def test_detect_no_intermittency(power_law):
    """Tests that a straight line is not intermittent."""
    est = estimate_scaling_function(power_law, Q_GRID)
    verdict = detect_intermittency(est)
    assert not verdict.intermittent
    assert verdict.slopes == pytest.approx((0.5,))


def test_detect_needs_points():
    with pytest.raises(ValueError):
        detect_intermittency(_estimate([0, 0.5, 1.0]))


def test_detect_warns_on_inconsistent_estimates():
    """Tests the warning for tau-hat far from convex."""
    with pytest.warns(RuntimeWarning):
        verdict = detect_intermittency(_estimate([0, 0.5, 2.0, 2.1, 2.2, 4.0]))
    assert not verdict.consistent
