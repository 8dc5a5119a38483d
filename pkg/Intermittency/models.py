"""Explicitly constructed multiscale processes.

* :class:`BiscaleDet`: X(t) = t^H, except X(t) = t^b with probability t^-a.
* :class:`TriscaleDet`: adds the intermediate scale t^{(H+b)/2} with
  probability t^{-a/2}; its scaling function is the biscale one.
* :class:`FbmMixture`: B_H(t_n), except B_b(t_n) when the switch U_n = 1,
  with P(U_n = 1) = t_n^-a and all switches independent.
* :class:`PowerLaw`: the deterministic path X(t) = t^H.

Marginals at distinct times of the deterministic models are drawn
independently; only one-dimensional laws matter for scaling functions.
"""

import dataclasses

import numpy as np

from Intermittency.data import ProcessModel
from Intermittency.fgn import FbmSpec, generate_fbm
from Intermittency.utils import model

__all__ = ['BiscaleDet', 'TriscaleDet', 'FbmMixture', 'PowerLaw',
           'simulate_biscale_det', 'simulate_triscale_det',
           'simulate_fbm_mixture', 'switch_indicators',
           'expected_switch_count']


def _check_scales(H, b, a):
    if not 0 < H < b:
        raise ValueError('Scales must satisfy 0 < H < b, got H=%g, b=%g' % (H, b))
    if not a > 0:
        raise ValueError('Switch exponent must satisfy a > 0, got a=%g' % a)


def _check_times(grid, at_least=1.0):
    if grid.t_values[0] < at_least:
        raise ValueError('Switch probabilities t^-a need t >= %g, got t = %g' % (
            at_least, grid.t_values[0]))


##############
# SIMULATORS #
##############


def switch_indicators(grid, a, rng):
    """Independent switches U(t) with P(U(t) = 1) = t^-a.

    Switches are thresholded uniforms, so under a shared stream the events
    for a smaller ``a`` contain those for a larger one.

    :return: boolean array over the grid

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.utils import spawn_replication_rng
    >>> grid = make_geometric_grid(10, 10, 5)
    >>> few = switch_indicators(grid, 0.8, spawn_replication_rng(0, 7))
    >>> many = switch_indicators(grid, 0.6, spawn_replication_rng(0, 7))
    >>> bool((many >= few).all())
    True
    """
    _check_times(grid)
    return rng.random(len(grid)) < grid.t_values ** -a


def expected_switch_count(grid, a):
    """Mean and variance of the number of switches on the grid
    (a Poisson-binomial count).

    >>> from Intermittency.data import make_arithmetic_grid
    >>> mean, variance = expected_switch_count(make_arithmetic_grid(1, 4), 1)
    >>> round(mean, 6), round(variance, 6)
    (2.083333, 0.659722)
    """
    p = grid.t_values ** -a
    return float(p.sum()), float((p * (1 - p)).sum())


def simulate_biscale_det(H, b, a, grid, rng):
    """One path of the deterministic biscale model.

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.utils import spawn_replication_rng
    >>> grid = make_geometric_grid(10, 10, 3)
    >>> path = simulate_biscale_det(0.5, 1.0, 0.5, grid, spawn_replication_rng(0, 0))
    >>> bool(np.all((path == grid.t_values ** 0.5) | (path == grid.t_values)))
    True
    """
    _check_scales(H, b, a)
    _check_times(grid)
    t = grid.t_values
    return np.where(rng.random(len(t)) < t ** -a, t ** b, t ** H)


def simulate_triscale_det(H, b, a, grid, rng):
    """One path of the deterministic triscale model."""
    _check_scales(H, b, a)
    t = grid.t_values
    p_middle, p_top = t ** (-a / 2), t ** -a
    if np.any(p_middle + p_top > 1):
        t_bad = t[np.argmax(p_middle + p_top > 1)]
        raise ValueError('Triscale probabilities exceed 1 at t = %g; start '
                         'the grid later' % t_bad)
    u = rng.random(len(t))
    return np.select([u < p_top, u < p_top + p_middle],
                     [t ** b, t ** ((H + b) / 2)], default=t ** H)


def simulate_fbm_mixture(H, b, a, grid, rng):
    """One path of X(t_n) = B_H(t_n), or B_b(t_n) when U_n = 1.

    B_H, B_b and the switches come from three independent child streams of
    ``rng``, so two values of ``a`` under one stream share both fBm paths.
    """
    _check_scales(H, b, a)
    if b >= 1:
        raise ValueError('Both Hurst indices must be below 1, got b=%g' % b)
    _check_times(grid)
    rng_h, rng_b, rng_switch = rng.spawn(3)
    low = generate_fbm(FbmSpec(H, grid), rng_h).values
    high = generate_fbm(FbmSpec(b, grid), rng_b).values
    return np.where(switch_indicators(grid, a, rng_switch), high, low)


##########
# MODELS #
##########


@model('biscale')
@dataclasses.dataclass(frozen=True)
class BiscaleDet(ProcessModel):
    H: float
    b: float
    a: float

    def __post_init__(self):
        _check_scales(self.H, self.b, self.a)

    def simulate(self, grid, rng):
        return simulate_biscale_det(self.H, self.b, self.a, grid, rng)


@model('triscale')
@dataclasses.dataclass(frozen=True)
class TriscaleDet(ProcessModel):
    H: float
    b: float
    a: float

    def __post_init__(self):
        _check_scales(self.H, self.b, self.a)

    def validate_grid(self, grid):
        t = grid.t_values
        if np.any(t ** (-self.a / 2) + t ** -self.a > 1):
            raise ValueError('Triscale probabilities exceed 1 on %r' % grid)
        return grid

    def simulate(self, grid, rng):
        return simulate_triscale_det(self.H, self.b, self.a, grid, rng)


@model('fbm_mixture')
@dataclasses.dataclass(frozen=True)
class FbmMixture(ProcessModel):
    H: float
    b: float
    a: float

    def __post_init__(self):
        _check_scales(self.H, self.b, self.a)
        if self.b >= 1:
            raise ValueError('Both Hurst indices must be below 1, got b=%g' % self.b)

    def validate_grid(self, grid):
        _check_times(grid)
        return grid

    def simulate(self, grid, rng):
        return simulate_fbm_mixture(self.H, self.b, self.a, grid, rng)


@model('power_law')
@dataclasses.dataclass(frozen=True)
class PowerLaw(ProcessModel):
    """X(t) = t^H, the same path in every replication."""

    H: float

    def simulate(self, grid, rng):
        return grid.t_values ** self.H
