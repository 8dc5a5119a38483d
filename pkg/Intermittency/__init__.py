"""Intermittency's main utility is the ``estimate`` function.

Invoke it on a process model and a time grid to simulate an ensemble and
obtain its estimated scaling function. The submodules hold the pieces:
closed-form scenarios, conjugates, supOU and fBm simulators and the
large-deviation checks.
"""

from Intermittency.data import (PathEnsemble, ScalingFunction, TimeGrid,
                                make_arithmetic_grid, make_geometric_grid)
from Intermittency.ensemble import load_ensemble, save_ensemble, simulate_ensemble
from Intermittency.estimator import DEFAULT_Q_GRID, estimate_scaling_function
from Intermittency.fgn import Fbm
from Intermittency.models import BiscaleDet, FbmMixture, PowerLaw, TriscaleDet
from Intermittency.scenarios import ScenarioSpec
from Intermittency.supou import SupOU

__version__ = '0.1.0'

__all__ = ['estimate', 'TimeGrid', 'PathEnsemble', 'ScalingFunction',
           'make_geometric_grid', 'make_arithmetic_grid', 'simulate_ensemble',
           'save_ensemble', 'load_ensemble', 'estimate_scaling_function',
           'ScenarioSpec', 'BiscaleDet', 'TriscaleDet', 'FbmMixture',
           'PowerLaw', 'Fbm', 'SupOU']


def estimate(model, grid, n_reps, seed, q_grid=DEFAULT_Q_GRID, workers=1):
    r"""
    At a high-level, measures how the moments of ``model`` grow. This is
    accomplished in two steps:

    1. ``n_reps`` independent paths are simulated on ``grid``.
    2. log E|X(t)|^q is regressed on log t for every order q.

    :param ProcessModel model: e.g. :class:`BiscaleDet`
    :param TimeGrid grid: sampling times spanning at least 1.5 decades
    :param int n_reps: number of replications
    :param int seed: master seed; the result does not depend on ``workers``
    :param q_grid: moment orders
    :return: :class:`Intermittency.estimator.ScalingEstimate`

    >>> from Intermittency import estimate, make_geometric_grid, PowerLaw
    >>> est = estimate(PowerLaw(0.7), make_geometric_grid(10, 10, 3), 4, seed=0,
    ...                q_grid=[0, 1, 2])
    >>> est.tau_hat.round(9).tolist()
    [0.0, 0.7, 1.4]
    >>> tau = ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5).tau()
    >>> tau(1), tau(2)
    (0.6, 1.5)
    """
    ensemble = simulate_ensemble(model, grid, n_reps, seed, workers=workers)
    return estimate_scaling_function(ensemble, q_grid)
