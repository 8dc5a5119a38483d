"""Small helpers shared by every module: enums, extended reals, random
streams and the model registry."""

import functools
import math

from enum import IntEnum as IntEnumBase

import numpy as np

__all__ = ['IntEnum', 'INF', 'is_inf', 'format_real', 'parse_real',
           'spawn_replication_rng', 'model', 'models', 'scalar_or_array']


#########
# Enums #
#########


def IntEnum(name, keys, start=1):
    """Explicitly define key-value pairs, numbered from ``start``.

    >>> Case = IntEnum('Case', ('First', 'Second'))
    >>> int(Case.Second)
    2
    """
    return IntEnumBase(name,
                       [(key, index) for index, key in enumerate(keys, start=start)])


##################
# Extended reals #
##################

INF = math.inf


def is_inf(value):
    """True for +inf only; -inf is never a legal value of a convex function
    in this package.

    >>> is_inf(INF), is_inf(1e308), is_inf(float('nan'))
    (True, False, False)
    """
    return bool(np.isposinf(value))


def format_real(value, digits=12):
    """Format a real for CSV output, with the ``inf`` token for +inf.

    >>> format_real(INF)
    'inf'
    >>> format_real(-INF)
    '-inf'
    >>> format_real(0.25)
    '0.25'
    >>> format_real(None)
    'NA'
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return 'NA'
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return '%.*g' % (digits, value)


def parse_real(text):
    """Inverse of :func:`format_real`; ``NA`` parses to ``nan``.

    >>> parse_real('inf'), parse_real(' -inf '), parse_real('0.5')
    (inf, -inf, 0.5)
    """
    text = text.strip()
    if text in ('NA', ''):
        return math.nan
    if text in ('inf', '+inf', '∞'):
        return INF
    if text == '-inf':
        return -INF
    return float(text)


def scalar_or_array(f):
    """Decorator for evaluators: python floats in, python floats out; arrays
    in, arrays out."""

    @functools.wraps(f)
    def wrap(self, x, *args, **kwargs):
        array = np.asarray(x, dtype=float)
        result = f(self, np.atleast_1d(array), *args, **kwargs)
        if array.ndim == 0:
            return float(result[0])
        return result.reshape(array.shape)
    return wrap


###########
# Streams #
###########


def spawn_replication_rng(seed, replication_index):
    """Independent random stream for one replication.

    The stream is a pure function of ``(seed, replication_index)``, so
    replications can be generated in any order and on any worker.

    :param int seed: master seed of the ensemble
    :param int replication_index: row of the ensemble
    :return numpy.random.Generator: the stream

    >>> a = spawn_replication_rng(42, 0).random(3)
    >>> b = spawn_replication_rng(42, 0).random(3)
    >>> bool((a == b).all())
    True
    >>> bool((a == spawn_replication_rng(42, 1).random(3)).any())
    False
    """
    if seed < 0 or replication_index < 0:
        raise ValueError('Seed and replication index must be nonnegative, got '
                         '(%d, %d)' % (seed, replication_index))
    sequence = np.random.SeedSequence([int(seed), int(replication_index)])
    return np.random.Generator(np.random.PCG64(sequence))


############
# Registry #
############

models = {}


def model(name):
    """Marker for a simulable process model.

    Registered classes can be rebuilt from their descriptor, which is how
    ensembles remember what produced them.

    :param str name: tag written to ensemble headers and config files
    """

    def wrap(cls):
        assert name not in models, 'Model %s registered twice' % name
        cls.tag = name
        models[name] = cls
        return cls

    return wrap
