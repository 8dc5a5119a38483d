"""Domain types shared by simulation and analysis.

Time grids, piecewise-linear convex functions (scaling functions and their
conjugates), moment estimates, process models and path ensembles. Every type
here is immutable once built; analysis code treats them as values.
"""

import dataclasses
import math

import numpy as np

from Intermittency.utils import INF, models, scalar_or_array

__all__ = ['TimeGrid', 'make_geometric_grid', 'make_arithmetic_grid',
           'PiecewiseLinear', 'ScalingFunction', 'ConjugateResult',
           'MomentEstimate', 'ProcessModel', 'PathEnsemble']

# relative tolerance used when merging slopes and comparing functions
TOLERANCE = 1e-12


#############
# TIME GRID #
#############


class TimeGrid(object):
    r"""Strictly increasing, positive sampling times.

    :param t_values: the times
    :param str kind: 'geometric', 'arithmetic' or 'explicit'
    :param dict params: construction parameters, kept for headers

    >>> grid = make_geometric_grid(10, 10, 4)
    >>> grid.t_values.tolist()
    [10.0, 100.0, 1000.0, 10000.0]
    >>> len(grid), round(grid.decades, 9)
    (4, 3.0)
    """

    def __init__(self, t_values, kind='explicit', params=None):
        t_values = np.array(t_values, dtype=float)
        if t_values.ndim != 1 or len(t_values) == 0:
            raise ValueError('A time grid needs at least one time.')
        if not np.all(np.isfinite(t_values)) or t_values[0] <= 0:
            raise ValueError('Times must be finite and positive, got first '
                             'time %r' % t_values[0])
        if np.any(np.diff(t_values) <= 0):
            raise ValueError('Times must be strictly increasing.')
        t_values.setflags(write=False)
        self.t_values = t_values
        self.kind = kind
        self.params = dict(params or {})

    #################
    # MAGIC METHODS #
    #################

    def __len__(self):
        return len(self.t_values)

    def __getitem__(self, i):
        return float(self.t_values[i])

    def __iter__(self):
        return iter(self.t_values.tolist())

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and \
            len(self) == len(other) and \
            bool(np.array_equal(self.t_values, other.t_values))

    __hash__ = None

    def __repr__(self):
        if self.kind == 'explicit':
            return 'TimeGrid(%d times in [%g, %g])' % (
                len(self), self.t_values[0], self.t_values[-1])
        return 'TimeGrid(%s, %s)' % (self.kind, ', '.join(
            '%s=%g' % item for item in sorted(self.params.items())))

    ##############
    # PROPERTIES #
    ##############

    @property
    def decades(self):
        """Number of decades spanned, log10(t_max / t_min)."""
        return float(np.log10(self.t_values[-1] / self.t_values[0]))

    @property
    def is_uniform(self):
        """Whether the grid is t_n = n * delta for n = 1..N.

        >>> make_arithmetic_grid(0.5, 4).is_uniform
        True
        >>> make_geometric_grid(2, 2, 3).is_uniform
        False
        """
        delta = self.t_values[0]
        expected = delta * np.arange(1, len(self) + 1)
        return bool(np.allclose(self.t_values, expected, rtol=1e-12, atol=0))

    @property
    def spacing(self):
        """Spacing of a uniform grid."""
        if not self.is_uniform:
            raise ValueError('%r is not uniform.' % self)
        return float(self.t_values[0])

    ##################
    # PUBLIC METHODS #
    ##################

    def require_log_positive(self):
        """Reject grids with a time t <= 1, where log t is not positive.

        >>> make_arithmetic_grid(1, 3).require_log_positive()
        Traceback (most recent call last):
            ...
        ValueError: Rate-of-growth statistics need all t > 1, got t = 1
        """
        if self.t_values[0] <= 1:
            raise ValueError('Rate-of-growth statistics need all t > 1, got '
                             't = %g' % self.t_values[0])
        return self

    def index_of(self, t):
        """Index of the grid time closest to ``t``, which must be on the grid
        up to a relative error of 1e-9.

        >>> make_geometric_grid(10, 10, 4).index_of(1000)
        2
        """
        i = int(np.argmin(np.abs(self.t_values - t)))
        if abs(self.t_values[i] - t) > 1e-9 * max(abs(t), 1):
            raise ValueError('Time %g is not on %r' % (t, self))
        return i

    def decade_indices(self, per_decade=4, t_min=None):
        """Indices of a geometrically spaced subset of this grid.

        Long arithmetic grids are thinned this way before log-log
        regressions, so that each decade weighs the same.

        >>> grid = make_arithmetic_grid(1, 1000)
        >>> [grid[i] for i in grid.decade_indices(per_decade=1, t_min=10)]
        [10.0, 100.0, 1000.0]
        """
        t_min = self.t_values[0] if t_min is None else t_min
        t_max = self.t_values[-1]
        if t_min > t_max:
            raise ValueError('t_min=%g beyond the grid end %g' % (t_min, t_max))
        n = int(math.floor(per_decade * math.log10(t_max / t_min) + 1e-9)) + 1
        targets = t_min * 10 ** (np.arange(n) / per_decade)
        indices = np.searchsorted(self.t_values, targets * (1 - 1e-12))
        indices = np.clip(indices, 0, len(self) - 1)
        return sorted(set(int(i) for i in indices))

    def subgrid(self, indices):
        """Grid restricted to ``indices``."""
        return TimeGrid(self.t_values[list(indices)])

    def to_dict(self):
        """Descriptor written to ensemble headers and reports."""
        if self.kind == 'explicit':
            return {'kind': 'explicit', 't_values': self.t_values.tolist()}
        return dict(self.params, kind=self.kind)

    @classmethod
    def from_dict(cls, descriptor):
        """Rebuild a grid from :meth:`to_dict` output or a config section.

        >>> TimeGrid.from_dict({'kind': 'geometric', 't0': 2, 'ratio': 2, 'n': 3})
        TimeGrid(geometric, n=3, ratio=2, t0=2)
        """
        descriptor = dict(descriptor)
        kind = descriptor.pop('kind', 'explicit')
        if kind == 'geometric':
            return make_geometric_grid(float(descriptor['t0']),
                                       float(descriptor['ratio']),
                                       int(descriptor['n']))
        if kind == 'arithmetic':
            return make_arithmetic_grid(float(descriptor['delta']),
                                        int(descriptor['n']))
        if kind == 'explicit':
            return cls(descriptor['t_values'])
        raise ValueError('Unknown grid kind: %s' % kind)


def make_geometric_grid(t0, ratio, n):
    """Geometric grid t_k = t0 * ratio**k, k = 0..n-1.

    :param float t0: first time, > 1
    :param float ratio: > 1
    :param int n: number of times, >= 2

    >>> make_geometric_grid(2, 2, 3).t_values.tolist()
    [2.0, 4.0, 8.0]
    >>> make_geometric_grid(1, 2, 3)
    Traceback (most recent call last):
        ...
    ValueError: Geometric grids need t0 > 1 (log t is a denominator), got t0 = 1
    """
    if t0 <= 1:
        raise ValueError('Geometric grids need t0 > 1 (log t is a '
                         'denominator), got t0 = %g' % t0)
    if ratio <= 1:
        raise ValueError('Geometric grids need ratio > 1, got %g' % ratio)
    if n < 2:
        raise ValueError('Geometric grids need n >= 2, got %d' % n)
    # integer powers keep decade grids exact
    t_values = [t0 * ratio ** k for k in range(n)]
    params = {'t0': t0, 'ratio': ratio, 'n': n}
    return TimeGrid(t_values, kind='geometric', params=params)


def make_arithmetic_grid(delta, n):
    """Uniform grid t_n = n * delta, n = 1..N.

    >>> make_arithmetic_grid(0.5, 4).t_values.tolist()
    [0.5, 1.0, 1.5, 2.0]
    """
    if delta <= 0:
        raise ValueError('Arithmetic grids need delta > 0, got %g' % delta)
    if n < 1:
        raise ValueError('Arithmetic grids need n >= 1, got %d' % n)
    t_values = delta * np.arange(1, n + 1, dtype=float)
    return TimeGrid(t_values, kind='arithmetic',
                    params={'delta': delta, 'n': n})


####################
# CONVEX FUNCTIONS #
####################


class PiecewiseLinear(object):
    r"""Convex piecewise-linear function, +inf outside a closed interval.

    The function is finite on ``[lo, hi]`` (either end may be infinite, and
    ``lo == hi`` describes a single point), changes slope at ``knots`` and
    takes the value ``value`` at the point ``at``.

    :param knots: increasing breakpoints strictly inside (lo, hi)
    :param slopes: one slope per segment, nondecreasing
    :param float lo: left end of the finite domain
    :param float hi: right end of the finite domain
    :param float value: value at ``at``
    :param float at: reference point inside [lo, hi]

    >>> f = PiecewiseLinear([0.0], [-1.0, 2.0], value=0.0, at=0.0)
    >>> f(-1), f(0), f(3)
    (1.0, 0.0, 6.0)
    >>> g = PiecewiseLinear([], [], lo=0.5, hi=0.5, value=0.0, at=0.5)
    >>> g(0.5), g(0.6)
    (0.0, inf)
    >>> PiecewiseLinear([1.0], [2.0, 1.0])
    Traceback (most recent call last):
        ...
    ValueError: Slopes must be nondecreasing for a convex function, got [2.0, 1.0]
    """

    def __init__(self, knots, slopes, lo=-INF, hi=INF, value=0.0, at=None):
        knots = [float(k) for k in knots]
        slopes = [float(s) for s in slopes]
        lo, hi = float(lo), float(hi)
        if not lo <= hi or math.isinf(lo) and lo > 0 or math.isinf(hi) and hi < 0:
            raise ValueError('Invalid domain [%g, %g]' % (lo, hi))
        if lo == hi:
            if knots or slopes:
                raise ValueError('A function on a single point has no slopes.')
        else:
            if len(slopes) != len(knots) + 1:
                raise ValueError('Need %d slopes for %d knots, got %d' % (
                    len(knots) + 1, len(knots), len(slopes)))
            if any(not math.isfinite(s) for s in slopes):
                raise ValueError('Slopes must be finite, got %s' % slopes)
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError('Knots must be strictly increasing, got %s' % knots)
        if knots and not lo < knots[0] <= knots[-1] < hi:
            raise ValueError('Knots must lie strictly inside [%g, %g]' % (lo, hi))
        if any(b < a - TOLERANCE * max(1, abs(a)) for a, b in zip(slopes, slopes[1:])):
            raise ValueError('Slopes must be nondecreasing for a convex '
                             'function, got %s' % slopes)
        if at is None:
            at = min(max(0.0, lo), hi)
        if not lo <= at <= hi or not math.isfinite(at):
            raise ValueError('Reference point %g outside [%g, %g]' % (at, lo, hi))
        if not math.isfinite(value):
            raise ValueError('Reference value must be finite, got %g' % value)

        # merge segments whose slopes agree
        merged_knots, merged_slopes = [], slopes[:1]
        for knot, slope in zip(knots, slopes[1:]):
            if abs(slope - merged_slopes[-1]) <= TOLERANCE * max(1, abs(slope)):
                continue
            merged_knots.append(knot)
            merged_slopes.append(slope)

        self.lo, self.hi = lo, hi
        self.knots = tuple(merged_knots)
        self.slopes = tuple(merged_slopes)
        self._values = self.__integrate(float(at), float(value))

    def __integrate(self, at, value):
        """Values at the knots, or at the single point of the domain."""
        if not self.knots:
            if self.lo == self.hi:
                return (value,)
            return (value - self.slopes[0] * at,)  # value at x = 0 of a line
        j = int(np.searchsorted(self.knots, at))
        values = [0.0] * len(self.knots)
        if j < len(self.knots):
            values[j] = value + self.slopes[j] * (self.knots[j] - at)
            start = j
        else:
            values[j - 1] = value - self.slopes[j] * (at - self.knots[j - 1])
            start = j - 1
        for i in range(start + 1, len(self.knots)):
            values[i] = values[i - 1] + self.slopes[i] * (self.knots[i] - self.knots[i - 1])
        for i in range(start - 1, -1, -1):
            values[i] = values[i + 1] - self.slopes[i + 1] * (self.knots[i + 1] - self.knots[i])
        return tuple(values)

    #################
    # MAGIC METHODS #
    #################

    @scalar_or_array
    def __call__(self, x):
        """Evaluate, with +inf outside the finite domain."""
        result = np.full(x.shape, INF)
        inside = (x >= self.lo) & (x <= self.hi)
        xs = x[inside]
        if self.lo == self.hi:
            result[inside] = self._values[0]
        elif not self.knots:
            result[inside] = self._values[0] + self.slopes[0] * xs
        else:
            knots = np.asarray(self.knots)
            j = np.searchsorted(knots, xs)
            anchor = np.where(j > 0, j - 1, 0)
            slope = np.asarray(self.slopes)[j]
            result[inside] = np.asarray(self._values)[anchor] + \
                slope * (xs - knots[anchor])
        return result

    def __eq__(self, other):
        return isinstance(other, PiecewiseLinear) and self.isclose(other)

    __hash__ = None

    def __repr__(self):
        return '%s(knots=%s, slopes=%s, domain=[%g, %g])' % (
            self.__class__.__name__, list(self.knots), list(self.slopes),
            self.lo, self.hi)

    ##############
    # PROPERTIES #
    ##############

    @property
    def is_point(self):
        return self.lo == self.hi

    @property
    def vertices(self):
        """Finite domain ends and knots, in increasing order.

        >>> PiecewiseLinear([1.0], [0.0, 1.0], lo=0.0, hi=2.0).vertices
        (0.0, 1.0, 2.0)
        """
        ends = [x for x in (self.lo, self.hi) if math.isfinite(x)]
        return tuple(sorted(set(ends) | set(self.knots)))

    ##################
    # PUBLIC METHODS #
    ##################

    def subgradient(self, x):
        """Interval of slopes of supporting lines at ``x``.

        :return: (left, right), with infinite ends at domain boundaries

        >>> f = PiecewiseLinear([1.0], [0.0, 1.0], lo=0.0, hi=2.0)
        >>> f.subgradient(1.0), f.subgradient(0.0), f.subgradient(2.0)
        ((0.0, 1.0), (-inf, 0.0), (1.0, inf))
        """
        if not self.lo <= x <= self.hi:
            raise ValueError('%g is outside the domain [%g, %g]' % (x, self.lo, self.hi))
        if self.is_point:
            return (-INF, INF)
        j = int(np.searchsorted(self.knots, x))
        on_knot = j < len(self.knots) and self.knots[j] == x
        left = self.slopes[j]
        right = self.slopes[j + 1] if on_knot else self.slopes[j]
        if x == self.lo:
            left = -INF
        if x == self.hi:
            right = INF
        return (left, right)

    def infimum(self, lo, hi):
        """Infimum over the closed interval [lo, hi]; +inf when it misses
        the domain.

        >>> f = PiecewiseLinear([1.0], [-1.0, 1.0], value=0.0, at=1.0)
        >>> f.infimum(2, 3), f.infimum(0, 5), f.infimum(-INF, 0)
        (1.0, 0.0, 1.0)
        """
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a > b:
            return INF
        if self.is_point:
            return self._values[0]
        if math.isinf(b) and self.slopes[-1] < 0 or \
                math.isinf(a) and self.slopes[0] > 0:
            return -INF
        candidates = [k for k in self.knots if a <= k <= b]
        candidates += [x for x in (a, b) if math.isfinite(x)]
        if not candidates:
            # a line on the whole real axis with slope zero
            return self._values[0]
        return float(min(self(x) for x in candidates))

    def isclose(self, other, atol=1e-9):
        """Equality up to ``atol`` in knots, slopes, ends and values."""
        if (self.lo, self.hi) != (other.lo, other.hi):
            ends = np.array([self.lo, self.hi, other.lo, other.hi])
            if not np.all(np.isfinite(ends)) or \
                    not np.allclose(ends[:2], ends[2:], rtol=0, atol=atol):
                return False
        if len(self.knots) != len(other.knots) or len(self.slopes) != len(other.slopes):
            return False
        if not np.allclose(self.knots, other.knots, rtol=0, atol=atol) or \
                not np.allclose(self.slopes, other.slopes, rtol=0, atol=atol):
            return False
        points = [x for x in self.vertices if math.isfinite(x)] or [0.0]
        mine = np.asarray([self(x) for x in points])
        theirs = np.asarray([other(x) for x in points])
        return bool(np.allclose(mine, theirs, rtol=0, atol=atol))


class ScalingFunction(PiecewiseLinear):
    r"""Scaling function tau of a process: convex, piecewise linear,
    tau(0) = 0.

    ``partial`` marks functions only known on their finite domain, with the
    region left of ``lo`` unknown rather than +inf (negative orders that
    were never computed).

    >>> tau = ScalingFunction([1.25], [0.6, 1.0])
    >>> tau(0), tau(1.25), tau(2)
    (0.0, 0.75, 1.5)
    >>> ScalingFunction([], [0.5], lo=0.1)
    Traceback (most recent call last):
        ...
    ValueError: A scaling function is finite at q = 0, got domain [0.1, inf]
    """

    def __init__(self, knots, slopes, lo=-INF, hi=INF, partial=False):
        if not lo <= 0 <= hi:
            raise ValueError('A scaling function is finite at q = 0, got '
                             'domain [%g, %g]' % (lo, hi))
        super().__init__(knots, slopes, lo=lo, hi=hi, value=0.0, at=0.0)
        self.partial = bool(partial)

    @classmethod
    def from_function(cls, f, partial=False):
        """Promote a :class:`PiecewiseLinear` vanishing at 0."""
        if not f.lo <= 0 <= f.hi or abs(f(0)) > 1e-9:
            raise ValueError('%r does not vanish at q = 0' % f)
        return cls(f.knots, f.slopes, lo=f.lo, hi=f.hi, partial=partial)

    def ratio(self, q):
        """tau(q) / q, nondecreasing in q on the domain.

        >>> ScalingFunction([1.25], [0.6, 1.0]).ratio(2)
        0.75
        """
        if q == 0:
            raise ValueError('tau(q)/q is undefined at q = 0')
        return self(q) / q


class ConjugateResult(object):
    r"""A conjugate tau* together with what is known about it.

    :param PiecewiseLinear function: tau* on its finite domain
    :param exposed_points: points of tau* with a strictly supporting line
    :param lower_envelope_only: intervals where ``function`` is only a lower
        bound of tau*

    >>> star = ConjugateResult(PiecewiseLinear([], [1.25], lo=0.6, hi=1.0,
    ...                        value=0.0, at=0.6), [0.6, 1.0])
    >>> star(0.8), star(1.1)
    (0.25, inf)
    >>> star.infinite_regions
    ((-inf, 0.6), (1.0, inf))
    """

    def __init__(self, function, exposed_points=(), lower_envelope_only=()):
        self.function = function
        self.exposed_points = tuple(sorted(float(x) for x in exposed_points))
        self.lower_envelope_only = tuple(
            (float(a), float(b)) for a, b in lower_envelope_only)
        for x in self.exposed_points:
            assert function.lo <= x <= function.hi, \
                'Exposed point %g outside the finite domain' % x

    def __call__(self, x):
        return self.function(x)

    def __repr__(self):
        return 'ConjugateResult(%r, exposed=%s)' % (
            self.function, list(self.exposed_points))

    @property
    def pieces(self):
        """(x_from, x_to, slope) for every linear piece of the finite part."""
        f = self.function
        if f.is_point:
            return ((f.lo, f.hi, math.nan),)
        edges = (f.lo,) + f.knots + (f.hi,)
        return tuple(zip(edges, edges[1:], f.slopes))

    @property
    def infinite_regions(self):
        """Open intervals where tau* = +inf."""
        regions = []
        if math.isfinite(self.function.lo):
            regions.append((-INF, self.function.lo))
        if math.isfinite(self.function.hi):
            regions.append((self.function.hi, INF))
        return tuple(regions)

    def is_lower_envelope(self, x):
        """Whether only a lower bound of tau*(x) is known."""
        return any(a < x < b for a, b in self.lower_envelope_only)


###########
# MOMENTS #
###########


@dataclasses.dataclass(frozen=True)
class MomentEstimate:
    """Empirical E|X(t)|^q with its Monte Carlo standard error."""

    q: float
    t: float
    value: float
    stderr: float
    n_reps: int

    def __post_init__(self):
        assert self.value >= 0, 'Absolute moments are nonnegative'


##########
# MODELS #
##########


class ProcessModel(object):
    """Base class of simulable models.

    Subclasses are frozen dataclasses registered with
    :func:`Intermittency.utils.model`; ``simulate`` returns one path on a
    grid from one random stream.
    """

    tag = None

    def simulate(self, grid, rng):
        raise NotImplementedError()

    def validate_grid(self, grid):
        """Reject grids the model cannot be sampled on."""
        return grid

    def to_dict(self):
        """Descriptor written to ensemble headers.

        >>> from Intermittency.models import BiscaleDet
        >>> BiscaleDet(0.6, 1.0, 0.5).to_dict()
        {'tag': 'biscale', 'H': 0.6, 'b': 1.0, 'a': 0.5}
        """
        return dict(tag=self.tag, **dataclasses.asdict(self))

    @staticmethod
    def from_dict(descriptor):
        """Rebuild a registered model from :meth:`to_dict` output."""
        descriptor = dict(descriptor)
        tag = descriptor.pop('tag', None)
        if tag not in models:
            raise ValueError('Unknown model %r, expected one of %s' % (
                tag, sorted(models)))
        return models[tag].from_params(descriptor)

    @classmethod
    def from_params(cls, params):
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = set(params) - names
        if unknown:
            raise ValueError('Unknown parameters for %s: %s' % (
                cls.tag, sorted(unknown)))
        return cls(**params)


############
# ENSEMBLE #
############


class PathEnsemble(object):
    r"""Replications x times matrix of process values with its provenance.

    :param ProcessModel model: what produced the paths
    :param TimeGrid grid: sampling times
    :param values: array of shape (n_reps, len(grid))
    :param int seed: master seed of the streams
    """

    def __init__(self, model, grid, values, seed):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(grid):
            raise ValueError('Values of shape %s do not match a grid of %d '
                             'times' % (values.shape, len(grid)))
        values.setflags(write=False)
        self.model = model
        self.grid = grid
        self.values = values
        self.seed = int(seed)

    def __repr__(self):
        return 'PathEnsemble(%s, %r, n_reps=%d, seed=%d)' % (
            self.model.tag, self.grid, self.n_reps, self.seed)

    def __eq__(self, other):
        return isinstance(other, PathEnsemble) and \
            self.model == other.model and self.grid == other.grid and \
            self.seed == other.seed and \
            bool(np.array_equal(self.values, other.values))

    __hash__ = None

    @property
    def n_reps(self):
        return self.values.shape[0]

    def column(self, t_index):
        """Values of all replications at grid index ``t_index``."""
        return self.values[:, t_index]

    def restrict(self, t_indices):
        """Ensemble on a subset of its grid."""
        t_indices = list(t_indices)
        return PathEnsemble(self.model, self.grid.subgrid(t_indices),
                            self.values[:, t_indices], self.seed)
