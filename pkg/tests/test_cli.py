from Intermittency.cli import Exit, main, read_tau_csv
from tests.config import sample
import csv
import json
import os
import pytest


RUN = """[run]
seed = 11
n_reps = {n_reps}

[model]
tag = biscale
H = 0.6
b = 1.0
a = 0.5

[grid]
kind = geometric
t0 = 10
ratio = 3.1622776601683795
n = 9

[tau]
q_grid = 0:3:0.25

[ldp]
sets = {sets}

{scenario}
"""

BISCALE = '[scenario]\ntag = biscale\nH = 0.6\nb = 1.0\na = {a}\n'
SUPOU = '[scenario]\ntag = supou_finite_var\nH = 0.7\nalpha = 0.5\n'


def write_config(tmpdir, n_reps=4000, sets='(0.9, 1.1)', scenario=BISCALE.format(a=0.5)):
    """Run file in ``tmpdir``; returns its path"""
    path = tmpdir.join('run.ini')
    path.write(RUN.format(n_reps=n_reps, sets=sets, scenario=scenario))
    return str(path)


def read(path):
    with open(path, 'rb') as fp:
        return fp.read()


############
# SIMULATE #
############


def test_simulate_writes_ensemble_and_metadata(tmpdir):
    out = str(tmpdir.join('out'))
    assert main(['simulate', '--config', write_config(tmpdir, 50), '--out', out]) == 0
    with open(os.path.join(out, 'ensemble.json')) as fp:
        metadata = json.load(fp)
    assert metadata['n_reps'] == 50
    assert metadata['model']['tag'] == 'biscale'
    assert metadata['ensemble_path'] == os.path.join(out, 'ensemble.bin')
    assert metadata['wall_time_seconds'] >= 0


def test_workers_do_not_change_the_ensemble(tmpdir):
    """Tests that the stored bytes are the same on one or eight workers."""
    config = write_config(tmpdir, 50)
    one, eight = str(tmpdir.join('one')), str(tmpdir.join('eight'))
    assert main(['simulate', '--config', config, '--out', one]) == 0
    assert main(['simulate', '--config', config, '--out', eight, '--workers', '8']) == 0
    assert read(os.path.join(one, 'ensemble.bin')) == \
        read(os.path.join(eight, 'ensemble.bin'))


def test_simulate_missing_seed(tmpdir, capsys):
    """Tests exit code 3 and the name of the missing field."""
    code = main(['simulate', '--config', sample('samples/missing_seed.ini'),
                 '--out', str(tmpdir)])
    assert code == Exit.CONFIG == 3
    assert '[run] seed' in capsys.readouterr().err


def test_missing_config_file(tmpdir):
    assert main(['simulate', '--config', str(tmpdir.join('nope.ini'))]) == 3


#######
# TAU #
#######


def test_tau_from_file_matches_in_memory(tmpdir):
    """Tests that a stored ensemble gives the same estimate as a fresh one."""
    config = write_config(tmpdir, 200)
    stored, fresh = str(tmpdir.join('stored')), str(tmpdir.join('fresh'))
    assert main(['simulate', '--config', config, '--out', stored]) == 0
    assert main(['tau', '--config', config, '--out', stored,
                 '--ensemble', os.path.join(stored, 'ensemble.bin')]) == 0
    assert main(['tau', '--config', config, '--out', fresh]) == 0
    assert read(os.path.join(stored, 'tau.csv')) == read(os.path.join(fresh, 'tau.csv'))


def test_tau_csv_columns(tmpdir):
    out = str(tmpdir.join('out'))
    assert main(['tau', '--config', write_config(tmpdir, 200), '--out', out]) == 0
    with open(os.path.join(out, 'tau.csv')) as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ['q', 'tau_hat', 'stderr', 'r_squared', 'tau_theory']
    assert rows[1] == ['0', '0', '0', '1', '0']
    q, tau = read_tau_csv(os.path.join(out, 'tau.csv'))
    assert len(q) == len(tau) == 13


def test_tau_rejects_bad_ensembles(tmpdir):
    """Tests exit code 3 for missing and corrupted ensemble files."""
    config = write_config(tmpdir, 20)
    out = str(tmpdir.join('out'))
    assert main(['tau', '--config', config, '--out', out,
                 '--ensemble', str(tmpdir.join('missing.bin'))]) == 3
    assert main(['simulate', '--config', config, '--out', out]) == 0
    path = os.path.join(out, 'ensemble.bin')
    data = bytearray(read(path))
    data[-1] ^= 0xFF
    with open(path, 'wb') as fp:
        fp.write(bytes(data))
    assert main(['tau', '--config', config, '--out', out, '--ensemble', path]) == 3


#############
# CONJUGATE #
#############


def test_conjugate_of_scenario(tmpdir):
    out = str(tmpdir.join('out'))
    assert main(['conjugate', '--config', write_config(tmpdir), '--out', out]) == 0
    with open(os.path.join(out, 'conjugate.csv')) as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ['x', 'tau_star', 'is_infinite', 'is_exposed']
    exposed = [float(row[0]) for row in rows[1:] if row[3] == '1']
    assert exposed == [0.6, 1.0]


def test_conjugate_of_noisy_estimate(tmpdir):
    """Tests that a non-convex estimate needs --repair."""
    tau_csv = tmpdir.join('tau.csv')
    tau_csv.write('q,tau_hat\n0,0\n1,1\n2,1.5\n3,3\n4,NA\n')
    out = str(tmpdir.join('out'))
    args = ['conjugate', '--tau-csv', str(tau_csv), '--out', out]
    assert main(args) == 3
    assert main(args + ['--repair']) == 0
    assert os.path.exists(os.path.join(out, 'conjugate.csv'))


def test_conjugate_needs_a_scenario(tmpdir):
    assert main(['conjugate', '--out', str(tmpdir)]) == 3


#######
# LDP #
#######


def test_ldp_pass(tmpdir):
    out = str(tmpdir.join('out'))
    assert main(['ldp', '--config', write_config(tmpdir), '--out', out]) == Exit.PASS
    with open(os.path.join(out, 'ldp.json')) as fp:
        assert json.load(fp)['verdict'] == 'pass'
    assert os.path.exists(os.path.join(out, 'ldp.csv'))


def test_ldp_fail(tmpdir):
    """Tests exit code 1 against the wrong switch exponent."""
    config = write_config(tmpdir, scenario=BISCALE.format(a=0.2))
    assert main(['ldp', '--config', config, '--out', str(tmpdir)]) == Exit.FAIL


def test_ldp_indeterminate(tmpdir):
    """Tests exit code 2 for a set where tau* is only a lower envelope."""
    config = write_config(tmpdir, sets='(0.1, 0.3)', scenario=SUPOU)
    assert main(['ldp', '--config', config, '--out', str(tmpdir)]) == Exit.INDETERMINATE


def test_ldp_malformed_set(tmpdir):
    assert main(['ldp', '--config', sample('samples/malformed_set.ini'),
                 '--out', str(tmpdir)]) == Exit.CONFIG


def test_ldp_several_sets(tmpdir):
    """Tests one report per set, numbered in file order."""
    out = str(tmpdir.join('out'))
    config = write_config(tmpdir, sets='(0.9, 1.1); (0.95, 1.05)')
    assert main(['ldp', '--config', config, '--out', out]) == 0
    for name in ('ldp_1.json', 'ldp_1.csv', 'ldp_2.json', 'ldp_2.csv'):
        assert os.path.exists(os.path.join(out, name))


#############
# REPRODUCE #
#############


def test_reproduce_scaling_figure(tmpdir):
    out = str(tmpdir.join('figures'))
    assert main(['reproduce', 'fig3', '--out', out]) == 0
    assert sorted(os.listdir(out)) == ['fig3_tau.csv', 'fig3_tau_star.csv']


def test_reproduce_path_figures(tmpdir):
    """Tests the sample-path series with a short path from the config."""
    config = tmpdir.join('paths.ini')
    config.write('[reproduce]\nT = 200\nseed = 3\n')
    out = str(tmpdir.join('figures'))
    assert main(['reproduce', 'fig6', '--config', str(config), '--out', out]) == 0
    assert main(['reproduce', 'fig7', '--config', str(config), '--out', out]) == 0
    with open(os.path.join(out, 'fig6_paths.csv')) as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ['t', 'x_a0.8_1', 'x_a0.6_1', 'switch_a0.8_1', 'switch_a0.6_1']
    assert len(rows) == 201
    assert all(int(row[4]) >= int(row[3]) for row in rows[1:])
    with open(os.path.join(out, 'fig7_rate_of_growth.csv')) as fp:
        assert len(fp.read().splitlines()) == 200


def test_reproduce_unknown_figure():
    with pytest.raises(SystemExit):
        main(['reproduce', 'fig1'])


def test_reproduce_several_paths(tmpdir):
    """Tests that [reproduce] n_paths adds paths that share seeds across
    exponents."""
    config = tmpdir.join('paths.ini')
    config.write('[reproduce]\nT = 50\nseed = 3\nn_paths = 3\n')
    out = str(tmpdir.join('figures'))
    assert main(['reproduce', 'fig6', '--config', str(config), '--out', out]) == 0
    with open(os.path.join(out, 'fig6_paths.csv')) as fp:
        rows = list(csv.DictReader(fp))
    assert len(rows) == 50
    assert len(rows[0]) == 1 + 2 * 2 * 3
    for k in (1, 2, 3):
        for row in rows:
            if row['switch_a0.6_%d' % k] == '0':
                assert row['x_a0.6_%d' % k] == row['x_a0.8_%d' % k]
    assert [row['x_a0.6_1'] for row in rows] != [row['x_a0.6_2'] for row in rows]


def test_reproduce_needs_a_path(tmpdir):
    config = tmpdir.join('paths.ini')
    config.write('[reproduce]\nn_paths = 0\n')
    assert main(['reproduce', 'fig6', '--config', str(config), '--out', str(tmpdir)]) == 3
