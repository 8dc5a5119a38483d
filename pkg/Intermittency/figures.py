"""Data series behind the figures, written as CSV.

Figures 2 to 5 are panels of tau and tau*; figures 6 and 7 are sample
paths of the fBm mixture and their rates of growth for two switching
exponents under one seed. Nothing is plotted.

>>> sorted(FIGURES)
['fig2', 'fig3', 'fig4', 'fig5', 'fig6', 'fig7']
"""

import csv
import logging
import math
import os

import numpy as np

from Intermittency.data import make_arithmetic_grid
from Intermittency.models import FbmMixture, switch_indicators
from Intermittency.scenarios import ScenarioSpec
from Intermittency.utils import format_real, spawn_replication_rng

__all__ = ['FIGURES', 'reproduce', 'curve_points', 'tau_rows',
           'conjugate_rows', 'write_tau_csv', 'write_conjugate_csv',
           'sample_paths']

logger = logging.getLogger(__name__)

# switching exponents compared in the sample-path figures
PATH_EXPONENTS = (0.8, 0.6)
PATH_H, PATH_B = 0.6, 0.8


##########
# CURVES #
##########


def curve_points(f, lo, hi, n=41):
    """Grid on [lo, hi] with the finite vertices of ``f`` added.

    >>> from Intermittency.scenarios import tau_biscale
    >>> curve_points(tau_biscale(0.6, 1, 0.5), 0, 2, n=3).tolist()
    [0.0, 1.0, 1.25, 2.0]
    """
    points = [x for x in f.vertices if math.isfinite(x) and lo <= x <= hi]
    return np.unique(np.concatenate([np.linspace(lo, hi, n), points]))


def tau_rows(sf, q_values):
    """(q, tau, is_infinite) rows; unknown values of a partial tau are NA."""
    for q in q_values:
        if getattr(sf, 'partial', False) and q < sf.lo:
            yield (format_real(q), 'NA', 0)
            continue
        value = float(sf(float(q)))
        yield (format_real(q), format_real(value), int(math.isinf(value)))


def _default_x_values(cr, n=41):
    f = cr.function
    finite = [x for x in f.vertices if math.isfinite(x)] + list(cr.exposed_points)
    finite += [x for x in (f.lo, f.hi) if math.isfinite(x)]
    if not finite:
        finite = [0.0, 1.0]
    lo, hi = min(finite) - 0.25, max(finite) + 0.25
    return np.unique(np.concatenate([np.linspace(lo, hi, n), finite]))


def conjugate_rows(cr, x_values=None):
    """(x, tau_star, is_infinite, is_exposed) rows of a conjugate.

    >>> from Intermittency.scenarios import tau_star_all_moments
    >>> [row for row in conjugate_rows(tau_star_all_moments(0.5), [0.4, 0.5])]
    [('0.4', 'inf', 1, 0), ('0.5', '0', 0, 1)]
    """
    if x_values is None:
        x_values = _default_x_values(cr)
    exposed = np.asarray(cr.exposed_points)
    for x in x_values:
        value = float(cr(float(x)))
        is_exposed = bool(len(exposed)) and bool(np.isclose(exposed, x, atol=1e-12).any())
        yield (format_real(x), format_real(value), int(math.isinf(value)),
               int(is_exposed))


def _write(path, header, rows):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug('Wrote %s', path)
    return path


def write_tau_csv(sf, path, q_values=None):
    if q_values is None:
        q_values = curve_points(sf, -2.0, 4.0)
    return _write(path, ('q', 'tau', 'is_infinite'), tau_rows(sf, q_values))


def write_conjugate_csv(cr, path, x_values=None):
    return _write(path, ('x', 'tau_star', 'is_infinite', 'is_exposed'),
                  conjugate_rows(cr, x_values))


################
# SAMPLE PATHS #
################


def sample_paths(T, seed, n_paths=1, exponents=PATH_EXPONENTS, H=PATH_H,
                 b=PATH_B):
    """``n_paths`` paths of the fBm mixture per switching exponent, with
    their switches.

    Path k of every exponent uses replication k of ``seed``, so paths with
    the same k share both fBm paths and the uniforms behind the switches.

    :return: grid, {(a, k): path}, {(a, k): switch indicators}
    """
    if n_paths < 1:
        raise ValueError('Need at least one path, got n_paths = %d' % n_paths)
    grid = make_arithmetic_grid(1.0, T)
    paths, switches = {}, {}
    for a in exponents:
        for k in range(n_paths):
            rng = spawn_replication_rng(seed, k)
            paths[a, k] = FbmMixture(H, b, a).simulate(grid, rng)
            switches[a, k] = switch_indicators(
                grid, a, spawn_replication_rng(seed, k).spawn(3)[2])
    return grid, paths, switches


def _column(prefix, key):
    a, k = key
    return '%s_a%g_%d' % (prefix, a, k + 1)


def _panel(name, spec, out):
    cr = spec.tau_star()
    return [write_tau_csv(spec.tau(), os.path.join(out, '%s_tau.csv' % name)),
            write_conjugate_csv(cr, os.path.join(out, '%s_tau_star.csv' % name))]


def fig2(out, **kwargs):
    """All moments finite: tau(q) = Hq, tau* finite at H only."""
    return _panel('fig2', ScenarioSpec('all_moments', H=0.6), out)


def fig3(out, **kwargs):
    """Moments finite on [-1, 3] only."""
    return _panel('fig3', ScenarioSpec('finite_window', H=0.625, q_lo=-1, q_hi=3), out)


def fig4(out, **kwargs):
    """Biscale: tau* is the segment from (H, 0) to (b, a)."""
    return _panel('fig4', ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5), out)


def fig5(out, **kwargs):
    """Finite variance supOU; tau* has ticks at H, 1 and alpha."""
    alpha = 0.5
    return _panel('fig5', ScenarioSpec('supou_finite_var', H=1 / (1 + alpha),
                                       alpha=alpha), out)


def fig6(out, seed=0, T=10 ** 4, n_paths=1):
    grid, paths, switches = sample_paths(T, seed, n_paths)
    header = (['t'] + [_column('x', key) for key in paths] +
              [_column('switch', key) for key in paths])
    rows = ([format_real(t)] + [format_real(paths[key][i]) for key in paths] +
            [int(switches[key][i]) for key in paths]
            for i, t in enumerate(grid.t_values))
    return [_write(os.path.join(out, 'fig6_paths.csv'), header, rows)]


def fig7(out, seed=0, T=10 ** 4, n_paths=1):
    grid, paths, _ = sample_paths(T, seed, n_paths)
    t = grid.t_values
    keep = t > 1
    rates = {}
    with np.errstate(divide='ignore'):
        for key, path in paths.items():
            rates[key] = np.log(np.abs(path[keep])) / np.log(t[keep])
    header = ['t'] + [_column('R', key) for key in rates]
    rows = ([format_real(s)] + [format_real(rates[key][i]) for key in rates]
            for i, s in enumerate(t[keep]))
    return [_write(os.path.join(out, 'fig7_rate_of_growth.csv'), header, rows)]


FIGURES = {'fig2': fig2, 'fig3': fig3, 'fig4': fig4, 'fig5': fig5,
           'fig6': fig6, 'fig7': fig7}


def reproduce(figure_id, out='.', seed=0, T=10 ** 4, n_paths=1):
    """Write the data files of one figure and return their paths.

    :param str figure_id: one of :data:`FIGURES`
    :param out: output directory, created when missing
    :param seed: seed shared by the sample-path figures
    :param T: path length of the sample-path figures
    :param n_paths: paths per switching exponent in the sample-path figures
    """
    if figure_id not in FIGURES:
        raise ValueError('Unknown figure %r, expected one of %s' % (
            figure_id, sorted(FIGURES)))
    os.makedirs(out, exist_ok=True)
    paths = FIGURES[figure_id](out, seed=seed, T=T, n_paths=n_paths)
    logger.info('%s: wrote %s', figure_id, ', '.join(paths))
    return paths
