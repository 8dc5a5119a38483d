r"""Rate of growth R(t) = log|X(t)| / log t and its large deviations.

For a set A of rates, P(R(t) in A) decays like t^rho with

    -inf over Int(A) and E of tau*  <=  rho  <=  -inf over cl(A) of tau*,

E the exposed points of tau*. :func:`verify_sandwich` estimates rho from an
ensemble and checks it against both bounds.

>>> A = Interval.parse('(0.9, 1.1)')
>>> A, A.contains([0.9, 1.0, 1.1]).tolist()
((0.9, 1.1), [False, True, False])
>>> bounds = sandwich_bounds(ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5).tau_star(), A)
>>> [round(bound, 12) for bound in bounds]
[-0.5, -0.375]
"""

import csv
import dataclasses
import json
import logging
import math
import re
import typing
import warnings

import numpy as np

from Intermittency.data import ConjugateResult
from Intermittency.scenarios import ScenarioSpec
from Intermittency.utils import INF, format_real, parse_real

__all__ = ['Interval', 'RateSample', 'DecayPoint', 'DecayEstimate', 'LdpReport',
           'rate_of_growth', 'empirical_decay_rate', 'sandwich_bounds',
           'verify_sandwich', 'check_nested', 'REPORT_VERSION']

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
PASS, FAIL, INDETERMINATE = 'pass', 'fail', 'indeterminate'
# the regression keeps times within this many decades of the largest one
EXTRAPOLATION_DECADES = 2.0
# 95% upper confidence limit of a probability with zero hits is about 3/n
RULE_OF_THREE = 3.0


############
# INTERVAL #
############


class Interval(object):
    r"""Interval of rates with open or closed ends.

    >>> Interval(1.1, INF)
    (1.1, inf)
    >>> Interval.parse('[0.6, 1]').contains([0.6, 1.0]).tolist()
    [True, True]
    >>> Interval(1.0, 0.9)
    Traceback (most recent call last):
        ...
    ValueError: Malformed interval: need x_lo < x_hi, got 1 >= 0.9
    """

    PATTERN = re.compile(r'^\s*([\(\[])\s*([^,]+?)\s*,\s*([^,]+?)\s*([\)\]])\s*$')

    def __init__(self, lo, hi, closed_lo=False, closed_hi=False):
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise ValueError('Malformed interval: need x_lo < x_hi, got %g >= %g'
                             % (lo, hi))
        self.lo, self.hi = lo, hi
        self.closed_lo = bool(closed_lo) and math.isfinite(lo)
        self.closed_hi = bool(closed_hi) and math.isfinite(hi)

    @classmethod
    def parse(cls, text):
        """Read '(a, b)', '[a, b]' or mixed brackets; 'inf' is allowed."""
        match = cls.PATTERN.match(text)
        if not match:
            raise ValueError('Malformed interval %r, expected e.g. (0.9, 1.1)' % text)
        left, lo, hi, right = match.groups()
        return cls(parse_real(lo), parse_real(hi), left == '[', right == ']')

    def __repr__(self):
        return '%s%s, %s%s' % ('[' if self.closed_lo else '(', format_real(self.lo),
                               format_real(self.hi), ']' if self.closed_hi else ')')

    def __eq__(self, other):
        return isinstance(other, Interval) and \
            (self.lo, self.hi, self.closed_lo, self.closed_hi) == \
            (other.lo, other.hi, other.closed_lo, other.closed_hi)

    __hash__ = None

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.closed_lo else x > self.lo
        below = x <= self.hi if self.closed_hi else x < self.hi
        return above & below

    def __contains__(self, x):
        return bool(self.contains(x))

    def issubset(self, other):
        """Whether every point of this interval lies in ``other``.

        >>> Interval(0.95, 1.05).issubset(Interval(0.9, 1.1))
        True
        """
        left = other.lo < self.lo or other.lo == self.lo and \
            (other.closed_lo or not self.closed_lo)
        right = self.hi < other.hi or other.hi == self.hi and \
            (other.closed_hi or not self.closed_hi)
        return left and right

    @property
    def interior(self):
        return Interval(self.lo, self.hi)

    @property
    def closure(self):
        return Interval(self.lo, self.hi, True, True)


##################
# RATE OF GROWTH #
##################


class RateSample(typing.NamedTuple):
    """R(t) of the replications with X(t) != 0, and how many vanished."""

    t: float
    values: np.ndarray
    zero_count: int


def rate_of_growth(ensemble, t_index):
    """R(t) = log|X(t)| / log t for every replication.

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.ensemble import simulate_ensemble
    >>> from Intermittency.models import PowerLaw
    >>> ensemble = simulate_ensemble(PowerLaw(0.7), make_geometric_grid(10, 10, 2), 2, seed=0)
    >>> rate_of_growth(ensemble, 1).values.round(12).tolist()
    [0.7, 0.7]
    """
    t = ensemble.grid[t_index]
    if t <= 1:
        raise ValueError('The rate of growth needs t > 1, got t = %g' % t)
    x = np.abs(ensemble.column(t_index))
    nonzero = x != 0
    return RateSample(t, np.log(x[nonzero]) / math.log(t),
                      int(np.count_nonzero(~nonzero)))


###############
# DECAY RATES #
###############


@dataclasses.dataclass(frozen=True)
class DecayPoint:
    """(1/log t) log P(R(t) in A) at one time, with a 95% band.

    With no hits, ``rho_hat`` is NaN and ``rho_hi`` is the rule-of-three
    upper limit.
    """

    t: float
    count: int
    n_reps: int
    rho_hat: float
    rho_lo: float
    rho_hi: float

    @property
    def one_sided(self):
        return self.count == 0

    @property
    def p_hat(self):
        return self.count / self.n_reps


def _decay_point(t, count, n_reps):
    log_t = math.log(t)
    if count == 0:
        return DecayPoint(t, 0, n_reps, math.nan, -INF,
                          math.log(min(1.0, RULE_OF_THREE / n_reps)) / log_t)
    p = count / n_reps
    rho = math.log(p) / log_t
    half = 1.96 * math.sqrt((1 - p) / count) / log_t
    return DecayPoint(t, count, n_reps, rho, rho - half, min(rho + half, 0.0))


@dataclasses.dataclass(frozen=True)
class DecayEstimate:
    """Per-time decay rates and their extrapolation to t -> infinity.

    ``rate`` is the slope of log P against log t with a free intercept;
    ``bound`` is the rule-of-three upper limit used when no time has a hit.
    """

    set_A: Interval
    points: tuple
    rate: typing.Optional[float]
    rate_stderr: typing.Optional[float]
    intercept: typing.Optional[float]
    bound: typing.Optional[float] = None

    @property
    def one_sided(self):
        return self.rate is None


def _weighted_line(log_t, log_p, variance):
    """Weighted least squares log_p = c + rho log_t; returns (rho, stderr, c)."""
    coef, cov = np.polyfit(log_t, log_p, 1, w=1 / np.sqrt(variance), cov='unscaled')
    residual = log_p - np.polyval(coef, log_t)
    dof = len(log_t) - 2
    if dof > 0:
        cov = cov * max(1.0, float(np.sum(residual ** 2 / variance)) / dof)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), float(coef[1])


def empirical_decay_rate(ensemble, set_A, t_indices=None,
                         decades=EXTRAPOLATION_DECADES):
    """(1/log t) log P-hat(R(t) in A) at each time, extrapolated by an
    inverse-variance weighted regression over the last ``decades`` decades.

    :param PathEnsemble ensemble: replications
    :param Interval set_A: rates
    :param t_indices: times to use, all of the grid by default
    :return DecayEstimate: the estimate
    """
    t_indices = range(len(ensemble.grid)) if t_indices is None else t_indices
    t_indices = list(t_indices)
    if len(t_indices) < 2:
        raise ValueError('Need at least 2 times, got %d' % len(t_indices))
    points = []
    for i in t_indices:
        sample = rate_of_growth(ensemble, i)
        count = int(np.count_nonzero(set_A.contains(sample.values)))
        points.append(_decay_point(sample.t, count, ensemble.n_reps))

    hits = [p for p in points if p.count > 0]
    t_max = points[-1].t
    recent = [p for p in hits if p.t >= t_max * 10 ** -decades]
    used = recent if len(recent) >= 2 else hits
    if len(used) >= 2:
        log_t = np.log([p.t for p in used])
        log_p = np.log([p.p_hat for p in used])
        n = ensemble.n_reps
        variance = np.array([(1 - p.p_hat + 1 / n) / p.count for p in used])
        rate, stderr, intercept = _weighted_line(log_t, log_p, variance)
        return DecayEstimate(set_A, tuple(points), rate, stderr, intercept)
    if len(used) == 1:
        p = used[0]
        return DecayEstimate(set_A, tuple(points), p.rho_hat,
                             (p.rho_hi - p.rho_lo) / (2 * 1.96), 0.0)
    warnings.warn('No replication has R(t) in %r at any time; only a one-sided '
                  'bound is available' % (set_A,), RuntimeWarning)
    return DecayEstimate(set_A, tuple(points), None, None, None, points[-1].rho_hi)


############
# SANDWICH #
############


def sandwich_bounds(cr, set_A):
    """(lower, upper) = (-inf of tau* over Int(A) and E, -inf of tau* over
    cl(A)).

    An infimum over an empty set is +inf, so its bound is -inf.

    >>> from Intermittency.scenarios import tau_star_biscale
    >>> bounds = sandwich_bounds(tau_star_biscale(0.6, 1, 0.5), Interval(0.7, 0.9))
    >>> [round(bound, 12) for bound in bounds]
    [-inf, -0.125]
    """
    interior = set_A.interior
    exposed = [cr(x) for x in cr.exposed_points if x in interior]
    lower = -min(exposed) if exposed else -INF
    upper = -cr.function.infimum(set_A.lo, set_A.hi)
    assert lower <= upper + 1e-12, 'Sandwich bounds are out of order'
    return lower, upper


def _envelope_overlap(cr, set_A):
    """'all' when cl(A), inside the finite domain, only meets regions where
    tau* is a lower envelope; 'some' or 'none' otherwise."""
    f = cr.function
    lo, hi = max(set_A.lo, f.lo), min(set_A.hi, f.hi)
    if lo > hi:
        return 'none'
    covered = [(max(a, lo), min(b, hi)) for a, b in cr.lower_envelope_only
               if max(a, lo) < min(b, hi)]
    if not covered:
        return 'none'
    if any(a <= lo and hi <= b for a, b in cr.lower_envelope_only):
        return 'all'
    return 'some'


@dataclasses.dataclass(frozen=True)
class LdpReport:
    """Empirical decay rate of P(R(t) in A) against the sandwich bounds."""

    COLUMNS = ('t', 'count', 'n_reps', 'p_hat', 'rho_hat', 'rho_lo', 'rho_hi',
               'one_sided')

    set_A: Interval
    decay: DecayEstimate
    lower: float
    upper: float
    slack: float
    verdict: str
    one_sided: bool
    scenario: typing.Optional[dict] = None

    @property
    def rate(self):
        return self.decay.rate

    def to_dict(self):
        def real(x):
            return x if x is None or math.isfinite(x) else format_real(x)
        return {
            'schema_version': REPORT_VERSION,
            'set_A': repr(self.set_A),
            'scenario': self.scenario,
            'lower_bound': real(self.lower),
            'upper_bound': real(self.upper),
            'rate': real(self.decay.rate),
            'rate_stderr': real(self.decay.rate_stderr),
            'one_sided_bound': real(self.decay.bound),
            'slack': real(self.slack),
            'one_sided': self.one_sided,
            'verdict': self.verdict,
            'points': [dict(zip(self.COLUMNS, row)) for row in self.rows()],
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, 'w') as fp:
                fp.write(text + '\n')
        return text

    def rows(self):
        for p in self.decay.points:
            yield (format_real(p.t), p.count, p.n_reps, format_real(p.p_hat),
                   format_real(p.rho_hat), format_real(p.rho_lo),
                   format_real(p.rho_hi), int(p.one_sided))

    def to_csv(self, path):
        with open(path, 'w', newline='') as fp:
            writer = csv.writer(fp)
            writer.writerow(self.COLUMNS)
            writer.writerows(self.rows())
        return path


def _verdict(decay, lower, upper, slack, upper_only=False):
    if upper_only:
        # tau* is partly a lower envelope on A, so only the upper bound holds
        return PASS if decay.rate is None or decay.rate <= upper + slack else FAIL
    if decay.rate is None:
        # no hits: P <= t^bound, so the lower bound must not demand more
        return PASS if lower - slack <= decay.bound else FAIL
    return PASS if lower - slack <= decay.rate <= upper + slack else FAIL


def verify_sandwich(ensemble, scenario, set_A, t_indices=None, slack=None):
    """Check the extrapolated decay rate of P(R(t) in A) against the bounds
    of ``scenario``.

    When tau* is only a lower envelope on part of cl(A), the lower bound is
    dropped and the check is one-sided.

    :param scenario: :class:`ScenarioSpec` or the :class:`ConjugateResult`
        of its tau
    :param slack: tolerance; 3 regression standard errors plus 0.02 when
        None
    :return LdpReport: report with verdict 'pass', 'fail' or
        'indeterminate'
    """
    if isinstance(scenario, ScenarioSpec):
        cr, descriptor = scenario.tau_star(), scenario.to_dict()
    elif isinstance(scenario, ConjugateResult):
        cr, descriptor = scenario, None
    else:
        raise TypeError('Expected a ScenarioSpec or ConjugateResult, got %s'
                        % type(scenario).__name__)
    decay = empirical_decay_rate(ensemble, set_A, t_indices)
    lower, upper = sandwich_bounds(cr, set_A)
    if slack is None:
        slack = 3 * (decay.rate_stderr or 0.0) + 0.02
    overlap = _envelope_overlap(cr, set_A)
    one_sided = decay.one_sided or overlap != 'none'
    if overlap == 'all':
        verdict = INDETERMINATE
        warnings.warn('tau* is only a lower envelope on %r: bounds indeterminate'
                      % (set_A,), RuntimeWarning)
    else:
        verdict = _verdict(decay, lower, upper, slack,
                           upper_only=overlap == 'some')
    logger.info('A = %r: rate %s in [%s, %s] +- %.3g -> %s', set_A,
                format_real(decay.rate), format_real(lower), format_real(upper),
                slack, verdict)
    return LdpReport(set_A, decay, lower, upper, slack, verdict, one_sided,
                     descriptor)


def check_nested(reports):
    """Pairs of reports on nested sets whose bounds or hit counts are out of
    order.

    For A inside B, both bounds and every hit count of A must not exceed
    those of B.
    """
    problems = []
    for small in reports:
        for big in reports:
            if small is big or not small.set_A.issubset(big.set_A):
                continue
            if small.lower > big.lower + 1e-12 or small.upper > big.upper + 1e-12:
                problems.append((small.set_A, big.set_A, 'bounds'))
            counts = zip(small.decay.points, big.decay.points)
            if any(p.count > r.count for p, r in counts):
                problems.append((small.set_A, big.set_A, 'counts'))
    return problems
