r"""Legendre-Fenchel transforms f*(x) = sup_q {qx - f(q)}.

Piecewise-linear convex functions are transformed exactly: slopes of f
become knots of f*, and knots of f become slopes of f*. Sampled functions
are transformed by a maximum over the sample.

>>> from Intermittency.scenarios import tau_biscale
>>> star = conjugate_piecewise_linear(tau_biscale(0.6, 1, 0.5))
>>> star.function.lo, star.function.hi, star(1.0), star.exposed_points
(0.6, 1.0, 0.5, (0.6, 1.0))
"""

import csv
import math

import numpy as np
import scipy.optimize

from Intermittency.data import ConjugateResult, PiecewiseLinear, ScalingFunction
from Intermittency.utils import INF, format_real

__all__ = ['GridFunction', 'conjugate_function', 'conjugate_piecewise_linear',
           'conjugate_numeric', 'exposed_points', 'biconjugate',
           'piecewise_from_points', 'repair_convex']

TAILS = ('infinite', 'linear')


#################
# GRID FUNCTION #
#################


class GridFunction(object):
    r"""A function sampled on an increasing grid, +inf values allowed.

    ``left_tail`` and ``right_tail`` say what happens beyond the grid:
    'infinite' (the function is +inf there) or 'linear' (it continues with
    its end slope).

    :param q_grid: increasing sample points
    :param values: samples, ``inf`` marking +inf

    >>> f = GridFunction([0, 1, 2], [0, 1, INF])
    >>> f.is_infinite.tolist()
    [False, False, True]
    >>> GridFunction([0, 1], [INF, INF]).end_slopes()
    Traceback (most recent call last):
        ...
    ValueError: End slopes need at least 2 finite values, got 0
    """

    def __init__(self, q_grid, values, left_tail='infinite', right_tail='infinite'):
        q_grid = np.array(q_grid, dtype=float)
        values = np.array(values, dtype=float)
        if q_grid.ndim != 1 or q_grid.shape != values.shape:
            raise ValueError('Grid and values must be 1-d of equal length, '
                             'got %s and %s' % (q_grid.shape, values.shape))
        if np.any(np.diff(q_grid) <= 0):
            raise ValueError('Grid must be strictly increasing.')
        if np.any(np.isnan(values)) or np.any(np.isneginf(values)):
            raise ValueError('Values must be real or +inf.')
        if left_tail not in TAILS or right_tail not in TAILS:
            raise ValueError('Tails must be one of %s' % (TAILS,))
        self.q_grid, self.values = q_grid, values
        self.left_tail, self.right_tail = left_tail, right_tail

    def __len__(self):
        return len(self.q_grid)

    @property
    def is_infinite(self):
        return np.isposinf(self.values)

    @classmethod
    def sample(cls, f, q_grid, left_tail='infinite', right_tail='infinite'):
        """Sample a callable, e.g. a :class:`PiecewiseLinear`."""
        q_grid = np.asarray(q_grid, dtype=float)
        return cls(q_grid, f(q_grid), left_tail=left_tail, right_tail=right_tail)

    def end_slopes(self):
        """Slopes of the first and last finite segments."""
        finite = np.isfinite(self.values)
        if finite.sum() < 2:
            raise ValueError('End slopes need at least 2 finite values, got %d'
                             % finite.sum())
        q, v = self.q_grid[finite], self.values[finite]
        return ((v[1] - v[0]) / (q[1] - q[0]), (v[-1] - v[-2]) / (q[-1] - q[-2]))

    def rows(self):
        for x, value in zip(self.q_grid, self.values):
            yield (format_real(x), format_real(value), int(np.isposinf(value)))

    def to_csv(self, path):
        with open(path, 'w', newline='') as fp:
            writer = csv.writer(fp)
            writer.writerow(('x', 'value', 'is_infinite'))
            writer.writerows(self.rows())
        return path


###################
# EXACT CONJUGATE #
###################


def conjugate_function(f):
    """Exact conjugate of a convex piecewise-linear function.

    >>> g = conjugate_function(PiecewiseLinear([0.0], [-1.0, 3.0]))
    >>> g.lo, g.hi, g(-1), g(3)
    (-1.0, 3.0, 0.0, 0.0)
    """
    if f.is_point:
        c = f.lo
        return PiecewiseLinear([], [c], value=-f(c), at=0.0)
    slopes, knots = f.slopes, f.knots
    lo = -INF if math.isfinite(f.lo) else slopes[0]
    hi = INF if math.isfinite(f.hi) else slopes[-1]
    if lo == hi:
        # f is a line on the whole axis
        return PiecewiseLinear([], [], lo=lo, hi=hi, value=-f(0.0), at=lo)
    new_knots = [s for s in slopes if lo < s < hi]
    new_slopes = ([f.lo] if math.isfinite(f.lo) else []) + list(knots) + \
        ([f.hi] if math.isfinite(f.hi) else [])
    # any point of the first segment has subgradient slopes[0]
    if knots:
        q0 = knots[0]
    elif math.isfinite(f.hi):
        q0 = f.hi
    else:
        q0 = f.lo
    return PiecewiseLinear(new_knots, new_slopes, lo=lo, hi=hi,
                           value=slopes[0] * q0 - f(q0), at=slopes[0])


def conjugate_piecewise_linear(sf, d_tau_interior=None):
    """Exact conjugate of a scaling function, with exposed points.

    For a ``partial`` scaling function (unknown left of its domain), the
    conjugate left of the first slope is only a lower envelope.

    :param ScalingFunction sf: convex piecewise-linear function
    :param d_tau_interior: interval of admissible exposing slopes; defaults
        to the interior of the domain of ``sf``
    """
    if not isinstance(sf, PiecewiseLinear):
        raise TypeError('Expected a PiecewiseLinear, got %s' % type(sf).__name__)
    function = conjugate_function(sf)
    envelope = []
    if getattr(sf, 'partial', False) and not sf.is_point:
        envelope.append((-INF, sf.slopes[0]))
    result = ConjugateResult(function, lower_envelope_only=envelope)
    if d_tau_interior is None:
        d_tau_interior = (sf.lo, sf.hi)
    return ConjugateResult(function, exposed_points(result, d_tau_interior),
                           lower_envelope_only=envelope)


def exposed_points(cr, d_tau_interior=(-INF, INF)):
    """Vertices of cr with a strictly supporting line whose slope lies in
    the open interval ``d_tau_interior``.

    >>> from Intermittency.scenarios import tau_star_biscale, tau_star_all_moments
    >>> exposed_points(tau_star_biscale(0.6, 1, 0.5))
    [0.6, 1.0]
    >>> exposed_points(tau_star_all_moments(0.5))
    [0.5]
    """
    f = cr.function
    a, b = d_tau_interior
    points = []
    for x in f.vertices:
        if cr.is_lower_envelope(x):
            continue
        left, right = f.subgradient(x)
        if max(left, a) < min(right, b):
            points.append(x)
    return points


def biconjugate(sf):
    """Conjugate applied twice; equals ``sf`` for closed convex input.

    >>> from Intermittency.scenarios import tau_biscale
    >>> tau = tau_biscale(0.6, 1, 0.5)
    >>> biconjugate(tau) == tau
    True
    """
    twice = conjugate_function(conjugate_function(sf))
    if isinstance(sf, ScalingFunction):
        return ScalingFunction.from_function(twice, partial=sf.partial)
    return twice


#####################
# NUMERIC CONJUGATE #
#####################


def conjugate_numeric(f, x_grid, chunk=256):
    """max over the grid of qx - f(q), with +inf past the end slopes of
    linear tails.

    :param GridFunction f: sampled function
    :param x_grid: points at which to evaluate the conjugate
    :return GridFunction: the conjugate on ``x_grid``

    >>> q = np.linspace(-10, 10, 20001)
    >>> g = conjugate_numeric(GridFunction(q, q ** 2), [2.0])
    >>> abs(g.values[0] - 1.0) < 1e-3
    True
    """
    x_grid = np.asarray(x_grid, dtype=float)
    finite = np.isfinite(f.values)
    if not finite.any():
        raise ValueError('Cannot conjugate a function that is +inf everywhere')
    q, v = f.q_grid[finite], f.values[finite]
    result = np.empty(len(x_grid))
    for start in range(0, len(x_grid), chunk):
        x = x_grid[start:start + chunk]
        result[start:start + chunk] = np.max(np.outer(x, q) - v, axis=1)
    if f.left_tail == 'linear':
        left = f.end_slopes()[0]
        result[x_grid < left - 1e-12 * max(1, abs(left))] = INF
    if f.right_tail == 'linear':
        right = f.end_slopes()[1]
        result[x_grid > right + 1e-12 * max(1, abs(right))] = INF
    return GridFunction(x_grid, result)


###################
# NOISY ESTIMATES #
###################


def piecewise_from_points(q, values, tolerance=1e-9):
    """Linear interpolant through (q, values) on [q_0, q_n], +inf outside.

    :raise ValueError: when the points are not convex beyond ``tolerance``

    >>> f = piecewise_from_points([0, 1, 2, 3], [0, 0.5, 1, 2])
    >>> f.knots, f.slopes
    ((2.0,), (0.5, 1.0))
    >>> piecewise_from_points([0, 1, 2], [0, 1, 1.5])
    Traceback (most recent call last):
        ...
    ValueError: Points are not convex: slope drops by 0.5 after q = 1
    """
    q = np.asarray(q, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(q) < 2 or not np.all(np.isfinite(values)):
        raise ValueError('Need at least 2 finite points.')
    slopes = np.diff(values) / np.diff(q)
    drops = slopes[:-1] - slopes[1:]
    if len(drops) and drops.max() > tolerance:
        i = int(np.argmax(drops))
        raise ValueError('Points are not convex: slope drops by %g after q = %g' % (
            drops[i], q[i + 1]))
    slopes = np.maximum.accumulate(slopes)
    at = 0.0 if q[0] <= 0 <= q[-1] else q[0]
    return PiecewiseLinear(q[1:-1], slopes, lo=q[0], hi=q[-1],
                           value=float(np.interp(at, q, values)), at=at)


def repair_convex(q, values):
    """Project the slopes of (q, values) onto nondecreasing sequences.

    Slopes are fitted by weighted isotonic regression (pool adjacent
    violators, weights = segment lengths); the value at q = 0, or at the
    first point when 0 is not sampled, is kept.

    >>> repair_convex([0, 1, 2], [0, 1, 1.5]).tolist()
    [0.0, 0.75, 1.5]
    """
    q = np.asarray(q, dtype=float)
    values = np.asarray(values, dtype=float)
    widths = np.diff(q)
    slopes = np.diff(values) / widths
    fitted = scipy.optimize.isotonic_regression(slopes, weights=widths).x
    repaired = np.concatenate([[0.0], np.cumsum(fitted * widths)])
    zero = np.flatnonzero(q == 0)
    anchor = int(zero[0]) if len(zero) else 0
    return repaired + (values[anchor] - repaired[anchor])
