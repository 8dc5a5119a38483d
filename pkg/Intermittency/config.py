"""Run configuration read from INI files.

One file fully determines a run::

    [run]
    seed = 7
    n_reps = 100000

    [model]
    tag = biscale
    H = 0.6
    b = 1.0
    a = 0.5

    [grid]
    kind = geometric
    t0 = 10
    ratio = 10
    n = 5

    [scenario]
    tag = biscale
    H = 0.6
    b = 1.0
    a = 0.5

    [tau]
    q_grid = 0:3:0.25

    [ldp]
    sets = (0.9, 1.1); (0.55, 0.65)

``[supou]`` entries are merged into ``[model]`` when the model is supOU, and
``[reproduce]`` sets the path length and seed of the sample-path figures.

>>> config = RunConfig.from_string('[run]\\nseed = 3\\n[grid]\\nkind = geometric\\n'
...                                't0 = 10\\nratio = 10\\nn = 3\\n')
>>> config.seed, config.grid
(3, TimeGrid(geometric, n=3, ratio=10, t0=10))
>>> config.require('seed', 'n_reps', 'model')
Traceback (most recent call last):
    ...
Intermittency.config.ConfigError: Missing required fields: [run] n_reps, [model] tag
"""

import configparser
import dataclasses
import typing

import numpy as np

from Intermittency.data import ProcessModel, TimeGrid
from Intermittency.estimator import DEFAULT_Q_GRID
from Intermittency.ldp import Interval
from Intermittency.scenarios import ScenarioSpec
from Intermittency.utils import models, parse_real

# registers every model
import Intermittency.fgn  # noqa: F401
import Intermittency.models  # noqa: F401
import Intermittency.supou  # noqa: F401

__all__ = ['ConfigError', 'RunConfig', 'load_config', 'parse_q_grid']

SECTIONS = ('run', 'model', 'grid', 'scenario', 'tau', 'ldp', 'supou', 'reproduce')

# attribute -> the field that supplies it, for error messages
REQUIRED = {
    'seed': '[run] seed',
    'n_reps': '[run] n_reps',
    'model': '[model] tag',
    'grid': '[grid] kind',
    'scenario': '[scenario] tag',
    'sets': '[ldp] sets',
}


class ConfigError(ValueError):
    """Invalid or incomplete configuration; ``fields`` names the culprits."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


def parse_q_grid(text):
    """Orders from 'start:stop:step' (stop included) or a comma list.

    >>> parse_q_grid('0:1:0.25')
    (0.0, 0.25, 0.5, 0.75, 1.0)
    >>> parse_q_grid('0.5, 2')
    (0.5, 2.0)
    """
    if ':' in text:
        start, stop, step = (float(part) for part in text.split(':'))
        if not step > 0:
            raise ValueError('step must be positive, got %g' % step)
        values = np.arange(start, stop + step / 2, step)
        return tuple(float(v) for v in np.round(values, 12))
    return tuple(float(part) for part in text.split(',') if part.strip())


def _parse_sets(text):
    return tuple(Interval.parse(part) for part in text.split(';') if part.strip())


def _model_value(kind, text):
    if kind is int:
        return int(text)
    if kind is float:
        return parse_real(text)
    if kind is str:
        return text
    # optional numbers such as burn_in
    if text.lower() in ('', 'none'):
        return None
    if text == 'auto':
        return text
    return float(text)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a CLI verb needs; unset sections stay None."""

    seed: typing.Optional[int] = None
    n_reps: typing.Optional[int] = None
    workers: int = 1
    out: str = '.'
    ensemble: typing.Optional[str] = None
    model: typing.Optional[ProcessModel] = None
    grid: typing.Optional[TimeGrid] = None
    scenario: typing.Optional[ScenarioSpec] = None
    q_grid: tuple = DEFAULT_Q_GRID
    tau_t_min: typing.Optional[float] = None
    repair: bool = False
    sets: tuple = ()
    slack: typing.Optional[float] = None
    ldp_t_min: typing.Optional[float] = None
    reproduce_T: int = 10000
    reproduce_seed: int = 0
    reproduce_n_paths: int = 1

    def __post_init__(self):
        problems = []
        if self.seed is not None and self.seed < 0:
            problems.append('[run] seed: must be >= 0, got %d' % self.seed)
        if self.n_reps is not None and self.n_reps < 1:
            problems.append('[run] n_reps: must be >= 1, got %d' % self.n_reps)
        if self.workers < 1:
            problems.append('[run] workers: must be >= 1, got %d' % self.workers)
        if self.reproduce_n_paths < 1:
            problems.append('[reproduce] n_paths: must be >= 1, got %d'
                            % self.reproduce_n_paths)
        if self.model is not None and self.grid is not None:
            try:
                self.model.validate_grid(self.grid)
            except ValueError as e:
                problems.append('[grid] %s' % e)
        if problems:
            raise ConfigError('; '.join(problems), [p.split(':')[0] for p in problems])

    def require(self, *names):
        """Raise one :class:`ConfigError` naming every missing field."""
        missing = [REQUIRED[name] for name in names
                   if getattr(self, name) in (None, ())]
        if missing:
            raise ConfigError('Missing required fields: %s' % ', '.join(missing),
                              missing)
        return self

    def t_indices(self, t_min):
        """Grid indices at or after ``t_min``; None keeps the default."""
        if t_min is None:
            return None
        return [i for i, t in enumerate(self.grid) if t >= t_min]

    @classmethod
    def from_parser(cls, parser, **overrides):
        errors, values = [], {}

        def field(section, key, convert, attribute=None):
            if not parser.has_option(section, key):
                return
            text = parser.get(section, key).strip()
            try:
                values[attribute or key] = convert(text)
            except (ValueError, TypeError, KeyError) as e:
                errors.append('[%s] %s: %s' % (section, key, e))

        unknown = [s for s in parser.sections() if s not in SECTIONS]
        if unknown:
            errors.append('unknown sections %s, expected %s' % (unknown, list(SECTIONS)))

        field('run', 'seed', int)
        field('run', 'n_reps', int)
        field('run', 'workers', int)
        field('run', 'out', str)
        field('run', 'ensemble', str)
        field('tau', 'q_grid', parse_q_grid)
        field('tau', 't_min', parse_real, 'tau_t_min')
        field('tau', 'repair', _boolean, 'repair')
        field('ldp', 'sets', _parse_sets)
        field('ldp', 'slack', parse_real)
        field('ldp', 't_min', parse_real, 'ldp_t_min')
        field('reproduce', 'T', int, 'reproduce_T')
        field('reproduce', 'seed', int, 'reproduce_seed')
        field('reproduce', 'n_paths', int, 'reproduce_n_paths')

        if parser.has_section('grid'):
            try:
                values['grid'] = _grid(dict(parser.items('grid')))
            except (ValueError, TypeError, KeyError) as e:
                errors.append('[grid] %s' % _message(e))
        if parser.has_section('model'):
            params = dict(parser.items('model'))
            if params.get('tag') == 'supou' and parser.has_section('supou'):
                params.update(parser.items('supou'))
            try:
                values['model'] = _model(params)
            except (ValueError, TypeError, KeyError) as e:
                errors.append('[model] %s' % _message(e))
        if parser.has_section('scenario'):
            params = dict(parser.items('scenario'))
            try:
                tag = params.pop('tag')
                values['scenario'] = ScenarioSpec(
                    tag, **{k: parse_real(v) for k, v in params.items()})
            except (ValueError, TypeError, KeyError) as e:
                errors.append('[scenario] %s' % _message(e))

        values.update((k, v) for k, v in overrides.items() if v is not None)
        if errors:
            raise ConfigError('; '.join(errors), [e.split(':')[0] for e in errors])
        return cls(**values)

    @classmethod
    def from_string(cls, text, **overrides):
        return cls.from_parser(_parser(text=text), **overrides)

    @classmethod
    def from_file(cls, path, **overrides):
        return cls.from_parser(_parser(path=path), **overrides)


def _parser(path=None, text=None):
    parser = configparser.ConfigParser(inline_comment_prefixes=('#',))
    parser.optionxform = str  # H and h are different parameters
    try:
        if path is not None:
            with open(path) as fp:
                parser.read_file(fp)
        else:
            parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError('Malformed config: %s' % e)
    return parser


def _message(e):
    if isinstance(e, KeyError):
        return 'missing field %s' % e
    return str(e)


def _boolean(text):
    states = configparser.ConfigParser.BOOLEAN_STATES
    if text.lower() not in states:
        raise ValueError('expected a boolean, got %r' % text)
    return states[text.lower()]


def _grid(params):
    if params.get('kind') == 'explicit':
        params['t_values'] = [parse_real(t) for t in params['t_values'].split(',')]
    return TimeGrid.from_dict(params)


def _model(params):
    tag = params.pop('tag')
    if tag not in models:
        raise ValueError('unknown model %r, expected one of %s' % (tag, sorted(models)))
    kinds = {f.name: f.type for f in dataclasses.fields(models[tag])}
    unknown = set(params) - set(kinds)
    if unknown:
        raise ValueError('unknown parameters %s for %s' % (sorted(unknown), tag))
    converted = {key: _model_value(kinds[key], text) for key, text in params.items()}
    return ProcessModel.from_dict(dict(converted, tag=tag))


def load_config(path=None, **overrides):
    """:class:`RunConfig` from ``path``, or from the overrides alone."""
    if path is None:
        return RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_file(path, **overrides)
