"""Command-line front end.

::

    intermittency simulate --config run.ini
    intermittency tau --config run.ini
    intermittency conjugate --config run.ini [--tau-csv tau.csv --repair]
    intermittency ldp --config run.ini
    intermittency reproduce fig4 --out figures

Exit codes: 0 pass, 1 statistical fail, 2 indeterminate, 3 configuration or
input error.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import time

from Intermittency.config import load_config
from Intermittency.conjugate import (conjugate_piecewise_linear,
                                     piecewise_from_points, repair_convex)
from Intermittency.data import ScalingFunction
from Intermittency.ensemble import (ensemble_header, load_ensemble,
                                    save_ensemble, simulate_ensemble)
from Intermittency.estimator import diagnose, estimate_scaling_function
from Intermittency.figures import FIGURES, reproduce, write_conjugate_csv
from Intermittency.ldp import FAIL, INDETERMINATE, check_nested, verify_sandwich
from Intermittency.utils import IntEnum, parse_real

__all__ = ['main', 'build_parser', 'cmd_simulate', 'cmd_tau', 'cmd_conjugate',
           'cmd_ldp', 'cmd_reproduce', 'Exit']

logger = logging.getLogger(__name__)

Exit = IntEnum('Exit', ('PASS', 'FAIL', 'INDETERMINATE', 'CONFIG'), start=0)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


############
# ENSEMBLE #
############


def _ensemble_path(config):
    return config.ensemble or os.path.join(config.out, 'ensemble.bin')


def _simulate(config):
    config.require('seed', 'n_reps', 'model', 'grid')
    return simulate_ensemble(config.model, config.grid, config.n_reps,
                             config.seed, workers=config.workers)


def _ensemble(config):
    """The stored ensemble named by the config, else a fresh simulation."""
    if config.ensemble is not None:
        if not os.path.exists(config.ensemble):
            raise ValueError('No ensemble at %s; run simulate first' % config.ensemble)
        return load_ensemble(config.ensemble)
    return _simulate(config)


def _theory(sf):
    """tau as a plain function, NaN where a partial tau is unknown."""
    def tau(q):
        if sf.partial and q < sf.lo:
            return math.nan
        return sf(q)
    return tau


#########
# VERBS #
#########


def cmd_simulate(config):
    """Simulate and store an ensemble with its JSON metadata.

    :return: path of the ensemble file
    """
    started = time.perf_counter()
    ensemble = _simulate(config)
    wall_time = time.perf_counter() - started
    path = save_ensemble(ensemble, _ensemble_path(config))
    metadata = dict(ensemble_header(ensemble), wall_time_seconds=wall_time,
                    ensemble_path=path)
    with open(os.path.splitext(path)[0] + '.json', 'w') as fp:
        json.dump(metadata, fp, indent=2, sort_keys=True)
        fp.write('\n')
    print('Simulated %s on %r: %d replications, seed %d, %.2fs -> %s' % (
        config.model.tag, config.grid, ensemble.n_reps, ensemble.seed,
        wall_time, path))
    return path


def cmd_tau(config, ensemble):
    """Estimate tau and write q, tau_hat, stderr, r_squared[, tau_theory].

    Orders outside the moment window of the scenario are NA rows.
    """
    sf, window = None, None
    if config.scenario is not None:
        sf = config.scenario.tau()
        window = (sf.lo, sf.hi)
    est = estimate_scaling_function(ensemble, config.q_grid,
                                    config.t_indices(config.tau_t_min), window)
    if config.repair:
        est = est.repaired()
    for problem in diagnose(est):
        logger.warning('%s violated at q = %g by %.3g', *problem)
    path = est.to_csv(os.path.join(config.out, 'tau.csv'),
                      tau_theory=_theory(sf) if sf is not None else None)
    print('Estimated tau at %d orders over t in [%g, %g] -> %s' % (
        len(est.q_grid), est.t_range[0], est.t_range[1], path))
    return path


def read_tau_csv(path):
    """(q, tau) pairs of a tau CSV, skipping NA rows."""
    q, tau = [], []
    with open(path, newline='') as fp:
        reader = csv.DictReader(fp)
        column = 'tau_hat' if 'tau_hat' in reader.fieldnames else 'tau'
        for row in reader:
            value = parse_real(row[column])
            if not math.isnan(value):
                q.append(parse_real(row['q']))
                tau.append(value)
    return q, tau


def _estimated_tau(q, tau, repair):
    if repair:
        tau = repair_convex(q, tau)
    f = piecewise_from_points(q, tau)
    if f.lo <= 0 <= f.hi and abs(f(0.0)) < 1e-9:
        # negative orders never estimated are unknown, not infinite
        return ScalingFunction.from_function(f, partial=f.lo >= 0)
    return f


def cmd_conjugate(config, tau_csv=None):
    """Write x, tau_star, is_infinite, is_exposed for the scenario or for an
    estimated tau read from ``tau_csv``."""
    if tau_csv is not None:
        q, tau = read_tau_csv(tau_csv)
        cr = conjugate_piecewise_linear(_estimated_tau(q, tau, config.repair))
    else:
        config.require('scenario')
        cr = config.scenario.tau_star()
    path = write_conjugate_csv(cr, os.path.join(config.out, 'conjugate.csv'))
    print('tau* exposed at %s -> %s' % (list(cr.exposed_points), path))
    return path


def cmd_ldp(config, ensemble):
    """Check each set A against the sandwich bounds; write JSON and CSV.

    :return: (reports, exit code)
    """
    config.require('scenario', 'sets')
    t_indices = config.t_indices(config.ldp_t_min)
    reports = []
    for i, set_A in enumerate(config.sets):
        report = verify_sandwich(ensemble, config.scenario, set_A, t_indices,
                                 config.slack)
        stem = os.path.join(config.out, 'ldp' if len(config.sets) == 1
                            else 'ldp_%d' % (i + 1))
        report.to_json(stem + '.json')
        report.to_csv(stem + '.csv')
        print('%r: %s' % (set_A, report.verdict))
        reports.append(report)
    for small, big, what in check_nested(reports):
        logger.warning('%s of %r exceed those of %r', what, small, big)
    verdicts = {report.verdict for report in reports}
    if FAIL in verdicts:
        return reports, Exit.FAIL
    if INDETERMINATE in verdicts:
        return reports, Exit.INDETERMINATE
    return reports, Exit.PASS


def cmd_reproduce(config, figure_id):
    seed = config.seed if config.seed is not None else config.reproduce_seed
    return reproduce(figure_id, config.out, seed=seed, T=config.reproduce_T,
                     n_paths=config.reproduce_n_paths)


########
# MAIN #
########


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='INI file describing the run')
    common.add_argument('--seed', type=int, help='overrides [run] seed')
    common.add_argument('--workers', type=int, help='overrides [run] workers')
    common.add_argument('--out', help='output directory, overrides [run] out')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(
        prog='intermittency',
        description='Simulate intermittent processes, estimate their scaling '
                    'functions and check large-deviation bounds.')
    verbs = parser.add_subparsers(dest='verb', required=True)
    verbs.add_parser('simulate', parents=[common], help='simulate and store an ensemble')
    tau = verbs.add_parser('tau', parents=[common], help='estimate tau')
    conjugate = verbs.add_parser('conjugate', parents=[common],
                                 help='Legendre-Fenchel transform of tau')
    ldp = verbs.add_parser('ldp', parents=[common], help='check decay rates')
    for verb in (tau, ldp):
        verb.add_argument('--ensemble', help='stored ensemble, overrides [run] ensemble')
    for verb in (tau, conjugate):
        verb.add_argument('--repair', action='store_true', default=None,
                          help='project noisy estimates onto convex functions')
    conjugate.add_argument('--tau-csv', help='estimated tau written by the tau verb')
    figure = verbs.add_parser('reproduce', parents=[common],
                              help='write the data series of a figure')
    figure.add_argument('figure_id', choices=sorted(FIGURES))
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format=LOG_FORMAT)
    logging.captureWarnings(True)
    try:
        config = load_config(args.config, seed=args.seed, workers=args.workers,
                             out=args.out, ensemble=getattr(args, 'ensemble', None),
                             repair=getattr(args, 'repair', None))
        os.makedirs(config.out, exist_ok=True)
        if args.verb == 'simulate':
            cmd_simulate(config)
        elif args.verb == 'tau':
            cmd_tau(config, _ensemble(config))
        elif args.verb == 'conjugate':
            cmd_conjugate(config, args.tau_csv)
        elif args.verb == 'ldp':
            return int(cmd_ldp(config, _ensemble(config))[1])
        else:
            cmd_reproduce(config, args.figure_id)
    except (ValueError, TypeError, KeyError, OSError) as e:
        logger.debug('Failed', exc_info=True)
        print('error: %s' % e, file=sys.stderr)
        return int(Exit.CONFIG)
    return int(Exit.PASS)


if __name__ == '__main__':
    sys.exit(main())
