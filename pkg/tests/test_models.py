from Intermittency.data import ProcessModel, make_arithmetic_grid, make_geometric_grid
from Intermittency.ldp import rate_of_growth
from Intermittency.models import (BiscaleDet, FbmMixture, PowerLaw, TriscaleDet,
                                  expected_switch_count, simulate_fbm_mixture,
                                  switch_indicators)
from Intermittency.utils import spawn_replication_rng
from tests.config import triscale
import numpy as np
import pytest


if triscale:
    pass


############
# SWITCHES #
############


@pytest.fixture(scope='module')
def switches():
    """Switches on t = 1..1e5 for a in {0.8, 0.6}, 20 replications sharing
    streams across a"""
    grid = make_arithmetic_grid(1.0, 10 ** 5)
    return grid, {a: np.array([switch_indicators(grid, a, spawn_replication_rng(99, r))
                               for r in range(20)])
                  for a in (0.8, 0.6)}


def test_switch_counts(switches):
    """Tests switch counts against the Poisson-binomial mean and variance."""
    grid, events = switches
    for a, u in events.items():
        mean, variance = expected_switch_count(grid, a)
        n = len(u)
        assert abs(u.sum() - n * mean) < 4 * np.sqrt(n * variance)


def test_switch_frequency_decay(switches):
    """Tests that the switch frequency decays like t^-a, decade by decade."""
    grid, events = switches
    t = grid.t_values
    for a, u in events.items():
        edges = [10 ** k for k in range(1, 6)]
        log_t = [np.log(lo) for lo in edges[:-1]]
        log_f = [np.log(u[:, (t >= lo) & (t < hi)].mean())
                 for lo, hi in zip(edges, edges[1:])]
        slope = np.polyfit(log_t, log_f, 1)[0]
        assert abs(slope + a) < 0.15


def test_switches_are_nested(switches):
    """Tests that a shared stream makes the events for 0.8 a subset of 0.6."""
    _, events = switches
    assert np.all(events[0.6] >= events[0.8])


def test_switches_need_t_above_one():
    with pytest.raises(ValueError):
        switch_indicators(make_arithmetic_grid(0.5, 4), 0.5, spawn_replication_rng(0, 0))


##########
# MODELS #
##########


def test_biscale_values():
    """Tests that every value is t^H or t^b."""
    grid = make_geometric_grid(10, 10, 4)
    path = BiscaleDet(0.6, 1.0, 0.5).simulate(grid, spawn_replication_rng(1, 1))
    t = grid.t_values
    assert np.all(np.isclose(path, t ** 0.6) | np.isclose(path, t))


def test_triscale_modes(triscale):
    """Tests three distinct modes of R(t) at t = 1e4."""
    sample = rate_of_growth(triscale, triscale.grid.index_of(1e4))
    modes = np.unique(sample.values.round(9))
    assert modes.tolist() == [0.6, 0.8, 1.0]


def test_triscale_rejects_early_grid():
    """Tests that probabilities above 1 are rejected."""
    with pytest.raises(ValueError):
        TriscaleDet(0.6, 1.0, 0.5).validate_grid(make_geometric_grid(1.5, 2, 3))


def test_fbm_mixture_shares_fbm_paths():
    """Tests that two exponents under one stream differ only at switches."""
    grid = make_arithmetic_grid(1.0, 512)
    few = simulate_fbm_mixture(0.6, 0.8, 0.8, grid, spawn_replication_rng(5, 0))
    many = simulate_fbm_mixture(0.6, 0.8, 0.6, grid, spawn_replication_rng(5, 0))
    u_few = switch_indicators(grid, 0.8, spawn_replication_rng(5, 0).spawn(3)[2])
    u_many = switch_indicators(grid, 0.6, spawn_replication_rng(5, 0).spawn(3)[2])
    assert np.array_equal(few[~u_many], many[~u_many])
    assert np.array_equal(few[u_few], many[u_few])
    with pytest.raises(ValueError):
        simulate_fbm_mixture(0.6, 1.2, 0.5, grid, spawn_replication_rng(0, 0))


def test_fbm_mixture_checks_hurst_indices():
    """Tests that a Hurst index of 1 or more is refused at construction."""
    with pytest.raises(ValueError):
        FbmMixture(0.6, 1.2, 0.5)
    with pytest.raises(ValueError):
        FbmMixture(0.6, 1.0, 0.5)
    with pytest.raises(ValueError):
        ProcessModel.from_dict({'tag': 'fbm_mixture', 'H': 0.6, 'b': 1.5,
                                'a': 0.5})


def test_model_descriptors():
    """Tests that registered models rebuild from their descriptors."""
    for m in (BiscaleDet(0.6, 1.0, 0.5), TriscaleDet(0.6, 1.0, 0.5),
              FbmMixture(0.6, 0.8, 0.5), PowerLaw(0.7)):
        assert ProcessModel.from_dict(m.to_dict()) == m
    with pytest.raises(ValueError):
        ProcessModel.from_dict({'tag': 'biscale', 'H': 0.6, 'b': 1.0, 'a': 0.5,
                                'c': 2})
    with pytest.raises(ValueError):
        ProcessModel.from_dict({'tag': 'quadscale'})
