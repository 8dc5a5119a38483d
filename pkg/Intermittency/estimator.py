"""Empirical moments, estimated scaling functions and intermittency
detection.

tau(q) is estimated as the slope of log E|X(t)|^q against log t over a
range of times; the intercept absorbs slowly varying factors and is
discarded.

>>> from Intermittency.data import make_geometric_grid
>>> from Intermittency.ensemble import simulate_ensemble
>>> from Intermittency.models import PowerLaw
>>> ensemble = simulate_ensemble(PowerLaw(0.7), make_geometric_grid(10, 10, 4), 3, seed=0)
>>> est = estimate_scaling_function(ensemble, [0, 1, 2])
>>> est.tau_hat.round(12).tolist(), est.r_squared.round(9).tolist()
([0.0, 0.7, 1.4], [1.0, 1.0, 1.0])
"""

import csv
import dataclasses
import logging
import math
import typing
import warnings

import numpy as np
import scipy.stats

from Intermittency.conjugate import repair_convex
from Intermittency.data import MomentEstimate
from Intermittency.utils import format_real

__all__ = ['DEFAULT_Q_GRID', 'empirical_moment', 'effective_fraction',
           'ScalingEstimate', 'estimate_scaling_function', 'Diagnostic',
           'diagnose', 'IntermittencyVerdict', 'detect_intermittency']

logger = logging.getLogger(__name__)

DEFAULT_Q_GRID = tuple(0.25 * k for k in range(17))
MIN_DECADES = 1.5
MIN_R_SQUARED = 0.95
# largest argument of exp that stays finite in double precision
LOG_MAX_FLOAT = math.log(np.finfo(float).max)


###########
# MOMENTS #
###########


def _log_abs(ensemble, q, t_index):
    x = np.abs(ensemble.column(t_index))
    if q < 0 and np.any(x == 0):
        raise ValueError('negative-order moment undefined at zero: %d of %d '
                         'replications vanish at t = %g' % (
                             np.count_nonzero(x == 0), len(x),
                             ensemble.grid[t_index]))
    with np.errstate(divide='ignore'):
        return np.log(x)


def _scaled_powers(ensemble, q, t_index):
    """|X(t)|^q / exp(shift) with the shift that keeps the largest term 1."""
    logs = q * _log_abs(ensemble, q, t_index)
    shift = np.max(logs)
    return np.exp(logs - shift), shift


def empirical_moment(ensemble, q, t_index):
    """Mean of |X(t)|^q over the replications, with its CLT standard error.

    :raise ValueError: for q < 0 when some X(t) = 0
    :raise OverflowError: when the moment is not a finite double

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.ensemble import simulate_ensemble
    >>> from Intermittency.models import PowerLaw
    >>> ensemble = simulate_ensemble(PowerLaw(0.5), make_geometric_grid(10, 10, 2), 2, seed=0)
    >>> empirical_moment(ensemble, 0, 1)
    MomentEstimate(q=0.0, t=100.0, value=1.0, stderr=0.0, n_reps=2)
    >>> round(empirical_moment(ensemble, 2, 1).value, 9)
    100.0
    """
    t, n = ensemble.grid[t_index], ensemble.n_reps
    if q == 0:
        return MomentEstimate(0.0, t, 1.0, 0.0, n)
    powers, shift = _scaled_powers(ensemble, q, t_index)
    if shift == -np.inf:
        return MomentEstimate(float(q), t, 0.0, 0.0, n)
    if shift > LOG_MAX_FLOAT:
        biggest = float(np.max(np.abs(_log_abs(ensemble, q, t_index))))
        raise OverflowError('E|X(t)|^%g overflows at t = %g; the largest finite '
                            'order is about %.3g' % (q, t, LOG_MAX_FLOAT / biggest))
    scale = math.exp(shift)
    stderr = float(np.std(powers, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return MomentEstimate(float(q), t, float(np.mean(powers)) * scale,
                          stderr * scale, n)


def effective_fraction(ensemble, q, t_index, mass=0.99):
    """Smallest fraction of replications carrying ``mass`` of the q-th
    moment; small values mean a few peaks dominate.

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.ensemble import simulate_ensemble
    >>> from Intermittency.models import PowerLaw
    >>> ensemble = simulate_ensemble(PowerLaw(0.5), make_geometric_grid(10, 10, 2), 4, seed=0)
    >>> effective_fraction(ensemble, 3, 1)
    1.0
    """
    if q == 0:
        return 1.0
    powers, _ = _scaled_powers(ensemble, q, t_index)
    cumulative = np.cumsum(np.sort(powers)[::-1])
    needed = int(np.searchsorted(cumulative, mass * cumulative[-1] * (1 - 1e-12))) + 1
    return min(needed, len(powers)) / len(powers)


#####################
# SCALING ESTIMATES #
#####################


@dataclasses.dataclass(frozen=True, eq=False)
class ScalingEstimate:
    """tau-hat over a q-grid with per-q regression diagnostics.

    Rows outside the moment window hold NaN.
    """

    q_grid: np.ndarray
    tau_hat: np.ndarray
    stderr: np.ndarray
    r_squared: np.ndarray
    t_values: np.ndarray
    effective_fraction: np.ndarray
    n_reps: int

    @property
    def t_range(self):
        return (float(self.t_values[0]), float(self.t_values[-1]))

    @property
    def finite(self):
        """Mask of the rows that were estimated."""
        return np.isfinite(self.tau_hat)

    def restrict(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return dataclasses.replace(
            self, q_grid=self.q_grid[mask], tau_hat=self.tau_hat[mask],
            stderr=self.stderr[mask], r_squared=self.r_squared[mask],
            effective_fraction=self.effective_fraction[mask])

    def repaired(self):
        """Estimate whose slopes are projected onto convex functions."""
        mask = self.finite
        tau_hat = self.tau_hat.copy()
        tau_hat[mask] = repair_convex(self.q_grid[mask], self.tau_hat[mask])
        return dataclasses.replace(self, tau_hat=tau_hat)

    def rows(self, tau_theory=None):
        for i, q in enumerate(self.q_grid):
            row = [format_real(q), format_real(self.tau_hat[i]),
                   format_real(self.stderr[i]), format_real(self.r_squared[i])]
            if tau_theory is not None:
                row.append(format_real(tau_theory(float(q))))
            yield row

    def to_csv(self, path, tau_theory=None):
        """Write q, tau_hat, stderr, r_squared and, given a scaling function,
        tau_theory."""
        header = ['q', 'tau_hat', 'stderr', 'r_squared']
        if tau_theory is not None:
            header.append('tau_theory')
        with open(path, 'w', newline='') as fp:
            writer = csv.writer(fp)
            writer.writerow(header)
            writer.writerows(self.rows(tau_theory))
        return path


def _default_t_indices(grid):
    if len(grid) <= 50:
        return list(range(len(grid)))
    return grid.decade_indices(per_decade=4)


def estimate_scaling_function(ensemble, q_grid=DEFAULT_Q_GRID, t_indices=None,
                              window=None):
    """Slope of log E|X(t)|^q against log t for each q.

    :param PathEnsemble ensemble: replications
    :param q_grid: orders
    :param t_indices: grid indices used in the regression; defaults to the
        whole grid, thinned to 4 points per decade when longer than 50
    :param window: (q_lo, q_hi) of finite moments; other orders give NaN
        rows and a warning
    :return ScalingEstimate: the estimate
    """
    q_grid = np.asarray(q_grid, dtype=float)
    t_indices = _default_t_indices(ensemble.grid) if t_indices is None else list(t_indices)
    t_values = np.asarray([ensemble.grid[i] for i in t_indices])
    if len(t_indices) < 3:
        raise ValueError('Need at least 3 times, got %d' % len(t_indices))
    decades = math.log10(t_values[-1] / t_values[0])
    if decades < MIN_DECADES - 1e-9:
        raise ValueError('Times must span at least %g decades, got %.3g' % (
            MIN_DECADES, decades))
    log_t = np.log(t_values)

    shape = len(q_grid)
    tau_hat, stderr = np.full(shape, np.nan), np.full(shape, np.nan)
    r_squared, fraction = np.full(shape, np.nan), np.full(shape, np.nan)
    outside = []
    for i, q in enumerate(q_grid):
        if window is not None and not window[0] <= q <= window[1]:
            outside.append(q)
            continue
        if q == 0:
            tau_hat[i], stderr[i], r_squared[i], fraction[i] = 0.0, 0.0, 1.0, 1.0
            continue
        moments = [empirical_moment(ensemble, q, j).value for j in t_indices]
        log_m = np.log(moments)
        fit = scipy.stats.linregress(log_t, log_m)
        tau_hat[i], stderr[i] = fit.slope, fit.stderr
        # a perfect fit to constant moments has an undefined correlation
        r_squared[i] = 1.0 if np.ptp(log_m) == 0 else fit.rvalue ** 2
        fraction[i] = effective_fraction(ensemble, q, t_indices[-1])
    if outside:
        warnings.warn('Orders %s lie outside the moment window %s; their rows '
                      'are NA' % (outside, tuple(window)), RuntimeWarning)
    poor = q_grid[r_squared < MIN_R_SQUARED]
    if len(poor):
        warnings.warn('r^2 below %g at q = %s: moments are not in a power-law '
                      'regime' % (MIN_R_SQUARED, poor.tolist()), RuntimeWarning)
    logger.debug('Estimated tau at %d orders over t in [%g, %g]', shape,
                 t_values[0], t_values[-1])
    return ScalingEstimate(q_grid, tau_hat, stderr, r_squared, t_values,
                           fraction, ensemble.n_reps)


###############
# DIAGNOSTICS #
###############


class Diagnostic(typing.NamedTuple):
    """A violation of a property every scaling function has."""

    kind: str
    q: float
    excess: float


def diagnose(est):
    """Points where tau-hat breaks convexity or the monotonicity of
    tau(q)/q by more than twice the standard errors.

    >>> est = ScalingEstimate(np.array([0., 1, 2, 3]), np.array([0., 1, 1.2, 3]),
    ...                       np.zeros(4), np.ones(4), np.array([10., 1e3]),
    ...                       np.ones(4), 10)
    >>> [(d.kind, d.q) for d in diagnose(est)]
    [('monotonicity', 2.0), ('convexity', 1.0)]
    """
    est = est.restrict(est.finite)
    q, tau, se = est.q_grid, est.tau_hat, est.stderr
    found = []
    nonzero = q != 0
    qs, ratio, ratio_se = q[nonzero], tau[nonzero] / q[nonzero], \
        se[nonzero] / np.abs(q[nonzero])
    for i in range(len(qs) - 1):
        if qs[i] < 0 < qs[i + 1]:
            continue
        drop = ratio[i] - ratio[i + 1]
        if drop > 2 * (ratio_se[i] + ratio_se[i + 1]) + 1e-12:
            found.append(Diagnostic('monotonicity', float(qs[i + 1]), float(drop)))
    for i in range(1, len(q) - 1):
        w = (q[i + 1] - q[i]) / (q[i + 1] - q[i - 1])
        excess = tau[i] - (w * tau[i - 1] + (1 - w) * tau[i + 1])
        if excess > 2 * max(se[i - 1], se[i], se[i + 1]) + 1e-12:
            found.append(Diagnostic('convexity', float(q[i]), float(excess)))
    return sorted(found, key=lambda d: (d.kind != 'monotonicity', d.q))


#################
# INTERMITTENCY #
#################


@dataclasses.dataclass(frozen=True)
class IntermittencyVerdict:
    """Outcome of a two-segment fit to tau-hat.

    ``slopes`` has one entry when a single line fits, two otherwise;
    ``intercept_drop`` is a in the upper segment bq - a.
    """

    intermittent: bool
    breakpoint: typing.Optional[float]
    slopes: tuple
    intercept_drop: typing.Optional[float]
    slope_gap: float
    gap_stderr: float
    breakpoint_band: typing.Optional[tuple]
    diagnostics: tuple = ()

    @property
    def consistent(self):
        return not any(d.kind == 'convexity' for d in self.diagnostics)


def _hinge_fit(q, tau, weights, knot):
    """Weighted least squares of tau = Hq + d max(q - knot, 0)."""
    design = np.column_stack([q, np.maximum(q - knot, 0)])
    root = np.sqrt(weights)
    coef, _, _, _ = np.linalg.lstsq(design * root[:, None], tau * root, rcond=None)
    sse = float(np.sum(weights * (design @ coef - tau) ** 2))
    return coef, sse, design


def detect_intermittency(est, candidates=400, min_points=5):
    """Fit tau = Hq up to a breakpoint and bq - a beyond it.

    The breakpoint minimizes the weighted squared error over a fine set of
    candidates; the verdict is positive when the slope gap b - H exceeds
    three standard errors. The band holds the candidates whose error is
    within the 95% chi-square profile bound of the minimum.

    >>> q = np.arange(0, 3.01, 0.25)
    >>> linear = ScalingEstimate(q, 0.7 * q, np.full(len(q), 0.01), np.ones(len(q)),
    ...                          np.array([10., 1e5]), np.ones(len(q)), 100)
    >>> verdict = detect_intermittency(linear)
    >>> verdict.intermittent, verdict.breakpoint, round(verdict.slopes[0], 12)
    (False, None, 0.7)
    """
    diagnostics = tuple(diagnose(est))
    est = est.restrict(est.finite)
    if len(est.q_grid) < min_points:
        raise ValueError('Need at least %d estimated orders, got %d' % (
            min_points, len(est.q_grid)))
    if any(d.kind == 'convexity' for d in diagnostics):
        warnings.warn('estimation inconsistent: tau-hat is not convex at q = %s'
                      % [d.q for d in diagnostics if d.kind == 'convexity'],
                      RuntimeWarning)
    q, tau = est.q_grid, est.tau_hat
    floor = max(1e-9, 1e-6 * float(np.max(est.stderr)))
    weights = 1 / np.maximum(est.stderr, floor) ** 2

    knots = np.union1d(np.linspace(q[1], q[-2], candidates), q[1:-1])
    fits = [_hinge_fit(q, tau, weights, knot) for knot in knots]
    sse = np.array([fit[1] for fit in fits])
    best = int(np.argmin(sse))
    (slope, gap), best_sse, design = fits[best]

    dof = max(len(q) - 3, 1)
    scale = max(1.0, best_sse / dof)
    covariance = np.linalg.pinv(design.T @ (design * weights[:, None])) * scale
    gap_stderr = float(math.sqrt(max(covariance[1, 1], 0.0)))
    intermittent = bool(gap > 3 * gap_stderr and gap > 1e-9)

    if not intermittent:
        line = np.sum(weights * q * tau) / np.sum(weights * q * q)
        return IntermittencyVerdict(False, None, (float(line),), None,
                                    float(gap), gap_stderr, None, diagnostics)
    inside = knots[sse <= best_sse + scipy.stats.chi2.ppf(0.95, 1) * scale]
    knot = float(knots[best])
    logger.debug('Breakpoint %g with slopes %g, %g', knot, slope, slope + gap)
    return IntermittencyVerdict(True, knot, (float(slope), float(slope + gap)),
                                float(gap * knot), float(gap), gap_stderr,
                                (float(inside.min()), float(inside.max())),
                                diagnostics)
