"""Fractional Gaussian noise and fractional Brownian motion.

Paths are exact in distribution at the grid points. Uniform grids use
circulant embedding (Davies-Harte), which is O(n log n); a Cholesky
factorization of the covariance serves as fallback and handles
non-uniform grids.
"""

import dataclasses
import functools
import logging
import typing

import numpy as np
import scipy.linalg

from Intermittency.data import ProcessModel, TimeGrid
from Intermittency.utils import model

__all__ = ['fgn_autocovariance', 'FbmSpec', 'FbmPath', 'generate_fgn',
           'generate_fbm', 'Fbm']

logger = logging.getLogger(__name__)

METHODS = ('auto', 'circulant', 'cholesky')


def fgn_autocovariance(hurst, lag, delta=1.0):
    r"""Autocovariance of fGn increments B_H((k+1)delta) - B_H(k delta).

    gamma(k) = (delta^{2H}/2)(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})

    :param float hurst: Hurst index in (0, 1)
    :param lag: integer lag(s) k >= 0
    :param float delta: grid spacing

    >>> fgn_autocovariance(0.5, 1)
    0.0
    >>> fgn_autocovariance(0.3, 0)
    1.0
    >>> round(fgn_autocovariance(0.75, 1), 4)
    0.4142
    """
    _check_hurst(hurst)
    k = np.abs(np.asarray(lag, dtype=float))
    two_h = 2 * hurst
    gamma = 0.5 * delta ** two_h * (
        np.abs(k + 1) ** two_h - 2 * k ** two_h + np.abs(k - 1) ** two_h)
    if gamma.ndim == 0:
        return float(gamma)
    return gamma


def _check_hurst(hurst):
    if not 0 < hurst < 1:
        raise ValueError('Hurst index must lie in (0, 1), got %g' % hurst)


@dataclasses.dataclass(frozen=True)
class FbmSpec:
    """Hurst index and sampling grid of one fBm path."""

    hurst: float
    grid: TimeGrid

    def __post_init__(self):
        _check_hurst(self.hurst)


class FbmPath(typing.NamedTuple):
    """A sampled path and the method that produced it."""

    values: np.ndarray
    method: str


##############
# GENERATORS #
##############


@functools.lru_cache(maxsize=32)
def _circulant_sqrt_eigenvalues(hurst, n):
    """Square roots of the eigenvalues of the 2n circulant embedding, or
    None when the embedding is not nonnegative definite."""
    gamma = fgn_autocovariance(hurst, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    if eigenvalues.min() < -1e-10 * eigenvalues.max():
        return None
    root = np.sqrt(np.clip(eigenvalues, 0, None))
    root.setflags(write=False)
    return root


@functools.lru_cache(maxsize=8)
def _toeplitz_factor(hurst, n):
    factor = scipy.linalg.cholesky(
        scipy.linalg.toeplitz(fgn_autocovariance(hurst, np.arange(n))),
        lower=True)
    factor.setflags(write=False)
    return factor


def _circulant(root, n, rng):
    m = len(root)  # 2n
    z = np.empty(m, dtype=complex)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    pairs = rng.standard_normal((n - 1, 2))
    z[1:n] = (pairs[:, 0] + 1j * pairs[:, 1]) / np.sqrt(2)
    z[n + 1:] = np.conj(z[1:n][::-1])
    return np.sqrt(m) * np.fft.ifft(root * z).real[:n]


def generate_fgn(hurst, n, rng, delta=1.0, method='auto'):
    """Sample n consecutive fGn increments with spacing ``delta``.

    :param float hurst: Hurst index
    :param int n: number of increments
    :param numpy.random.Generator rng: random stream
    :param float delta: spacing; increments have variance delta^{2H}
    :param str method: 'auto', 'circulant' or 'cholesky'
    :return FbmPath: increments and the method that ran

    >>> from Intermittency.utils import spawn_replication_rng
    >>> noise = generate_fgn(0.7, 8, spawn_replication_rng(1, 0))
    >>> noise.values.shape, noise.method
    ((8,), 'circulant')
    """
    _check_hurst(hurst)
    if method not in METHODS:
        raise ValueError('Unknown method %r, expected one of %s' % (method, METHODS))
    if n < 1:
        raise ValueError('Need at least one increment, got n = %d' % n)
    root = None
    if method != 'cholesky' and n > 1:
        root = _circulant_sqrt_eigenvalues(hurst, n)
        if root is None:
            if method == 'circulant':
                raise ValueError('Circulant embedding of H=%g, n=%d is not '
                                 'nonnegative definite' % (hurst, n))
            logger.warning('Circulant embedding failed for H=%g, n=%d; '
                           'falling back to Cholesky', hurst, n)
    if root is not None:
        values, used = _circulant(root, n, rng), 'circulant'
    else:
        values, used = _toeplitz_factor(hurst, n) @ rng.standard_normal(n), 'cholesky'
    return FbmPath(values * delta ** hurst, used)


def fbm_covariance(hurst, s, t):
    """Cov(B_H(s), B_H(t)) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.

    >>> fbm_covariance(0.5, 2.0, 3.0)
    2.0
    """
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    two_h = 2 * hurst
    covariance = 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h -
                        np.abs(t - s) ** two_h)
    return float(covariance) if covariance.ndim == 0 else covariance


def generate_fbm(spec, rng, method='auto'):
    """Sample B_H at the grid times, with B_H(0) = 0.

    Uniform grids cumulate fGn; other grids factor the fBm covariance of
    the grid times directly.

    :param FbmSpec spec: Hurst index and grid
    :param numpy.random.Generator rng: random stream
    :return FbmPath: path and method

    >>> from Intermittency.data import make_arithmetic_grid
    >>> from Intermittency.utils import spawn_replication_rng
    >>> spec = FbmSpec(0.6, make_arithmetic_grid(1, 16))
    >>> a = generate_fbm(spec, spawn_replication_rng(3, 0))
    >>> b = generate_fbm(spec, spawn_replication_rng(3, 0))
    >>> bool((a.values == b.values).all())
    True
    """
    grid = spec.grid
    if grid.is_uniform:
        noise = generate_fgn(spec.hurst, len(grid), rng, delta=grid.spacing,
                             method=method)
        return FbmPath(np.cumsum(noise.values), noise.method)
    if method == 'circulant':
        raise ValueError('Circulant embedding needs a uniform grid, got %r' % grid)
    t = grid.t_values
    covariance = fbm_covariance(spec.hurst, t[:, None], t[None, :])
    factor = scipy.linalg.cholesky(covariance, lower=True)
    return FbmPath(factor @ rng.standard_normal(len(t)), 'cholesky')


@model('fbm')
@dataclasses.dataclass(frozen=True)
class Fbm(ProcessModel):
    """Fractional Brownian motion, self-similar with tau(q) = Hq."""

    H: float

    def __post_init__(self):
        _check_hurst(self.H)

    def simulate(self, grid, rng):
        return generate_fbm(FbmSpec(self.H, grid), rng).values
