"""Ensemble generation and persistence.

Replication ``i`` is always simulated from ``spawn_replication_rng(seed, i)``,
so the values do not depend on how replications are split across workers.

Ensembles are stored in one binary file: a magic string, a length-prefixed
JSON header (schema version, model, grid, seed, n_reps and the sha256 of the
payload) and the values as a .npy payload.
"""

import concurrent.futures
import hashlib
import json
import logging
import time

import numpy as np

from Intermittency.data import PathEnsemble, ProcessModel, TimeGrid
from Intermittency.utils import spawn_replication_rng

__all__ = ['simulate_ensemble', 'save_ensemble', 'load_ensemble',
           'FORMAT_VERSION']

logger = logging.getLogger(__name__)

MAGIC = b'INTERMITTENCY-ENSEMBLE\n'
FORMAT_VERSION = 1
HEADER_LENGTH_BYTES = 8


##############
# GENERATION #
##############


def _simulate_block(model, grid, seed, start, stop):
    """Rows ``start`` to ``stop`` of an ensemble."""
    block = np.empty((stop - start, len(grid)))
    for row, index in enumerate(range(start, stop)):
        block[row] = model.simulate(grid, spawn_replication_rng(seed, index))
    return block


def _blocks(n_reps, workers):
    size = max(1, -(-n_reps // (4 * workers)))
    return [(start, min(start + size, n_reps)) for start in range(0, n_reps, size)]


def simulate_ensemble(model, grid, n_reps, seed, workers=1):
    """Simulate ``n_reps`` independent paths of ``model`` on ``grid``.

    :param ProcessModel model: registered model
    :param TimeGrid grid: sampling times
    :param int n_reps: number of replications
    :param int seed: master seed
    :param int workers: processes to fan out to; never changes the values
    :return PathEnsemble: the ensemble

    >>> from Intermittency.data import make_geometric_grid
    >>> from Intermittency.models import BiscaleDet
    >>> grid = make_geometric_grid(10, 10, 3)
    >>> ensemble = simulate_ensemble(BiscaleDet(0.6, 1.0, 0.5), grid, 5, seed=1)
    >>> ensemble.values.shape
    (5, 3)
    """
    if n_reps < 1:
        raise ValueError('Need at least one replication, got %d' % n_reps)
    if workers < 1:
        raise ValueError('Need at least one worker, got %d' % workers)
    model.validate_grid(grid)
    blocks = _blocks(n_reps, workers)
    started = time.perf_counter()
    logger.info('Simulating %d replications of %s on %d worker(s)',
                n_reps, model.tag, workers)
    if workers == 1 or len(blocks) == 1:
        parts = [_simulate_block(model, grid, seed, *block) for block in blocks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_block, model, grid, seed, *block)
                       for block in blocks]
            parts = [future.result() for future in futures]
    logger.info('Simulated %s in %.2fs', model.tag, time.perf_counter() - started)
    return PathEnsemble(model, grid, np.concatenate(parts), seed)


###############
# PERSISTENCE #
###############


def _checksum(values):
    return hashlib.sha256(values.tobytes()).hexdigest()


def ensemble_header(ensemble):
    """JSON-serializable description of an ensemble."""
    return {
        'format_version': FORMAT_VERSION,
        'model': ensemble.model.to_dict(),
        'grid': dict(ensemble.grid.to_dict(),
                     t_values=ensemble.grid.t_values.tolist()),
        'seed': ensemble.seed,
        'n_reps': ensemble.n_reps,
        'dtype': '<f8',
        'sha256': _checksum(np.ascontiguousarray(ensemble.values, dtype='<f8')),
    }


def save_ensemble(ensemble, path):
    """Write ``ensemble`` to ``path``; identical ensembles give identical
    bytes."""
    values = np.ascontiguousarray(ensemble.values, dtype='<f8')
    header = json.dumps(ensemble_header(ensemble), sort_keys=True).encode('utf-8')
    with open(path, 'wb') as fp:
        fp.write(MAGIC)
        fp.write(len(header).to_bytes(HEADER_LENGTH_BYTES, 'little'))
        fp.write(header)
        np.lib.format.write_array(fp, values, allow_pickle=False)
    logger.debug('Saved %r to %s', ensemble, path)
    return path


def read_header(path):
    """Header of a stored ensemble, without loading the values."""
    with open(path, 'rb') as fp:
        return _read_header(fp, path)


def _read_header(fp, path):
    if fp.read(len(MAGIC)) != MAGIC:
        raise ValueError('%s is not an ensemble file' % path)
    length = int.from_bytes(fp.read(HEADER_LENGTH_BYTES), 'little')
    try:
        header = json.loads(fp.read(length).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ValueError('Corrupted header in %s: %s' % (path, e))
    if header.get('format_version') != FORMAT_VERSION:
        raise ValueError('Unsupported ensemble format %r in %s' % (
            header.get('format_version'), path))
    return header


def load_ensemble(path):
    """Read an ensemble written by :func:`save_ensemble`, verifying its
    checksum."""
    with open(path, 'rb') as fp:
        header = _read_header(fp, path)
        try:
            values = np.lib.format.read_array(fp, allow_pickle=False)
        except ValueError as e:
            raise ValueError('Corrupted payload in %s: %s' % (path, e))
    if _checksum(np.ascontiguousarray(values, dtype='<f8')) != header['sha256']:
        raise ValueError('Checksum mismatch in %s: the file is corrupted' % path)
    grid_descriptor = dict(header['grid'])
    t_values = grid_descriptor.pop('t_values')
    kind = grid_descriptor.pop('kind')
    grid = TimeGrid(t_values, kind=kind, params=grid_descriptor)
    model = ProcessModel.from_dict(header['model'])
    return PathEnsemble(model, grid, values, header['seed'])
