r"""Superpositions of Ornstein-Uhlenbeck type processes (supOU) and their
integrals.

Y(t) is approximated by m independent OU type components

    Y(t) = V_1(t) + ... + V_m(t),   dV_k = -xi_k V_k dt + dL_k(xi_k t),

with decay rates xi_k drawn from the mixing law pi and drivers L_k carrying
1/m of the Levy cumulant. The time change xi_k t makes the marginal of each
component independent of xi_k, so Y has correlation E exp(-xi u), which is
(1 + u/rate)^-alpha for Gamma(alpha, rate) mixing.

Drivers are a Brownian part with variance ``b_gauss`` per unit time plus an
optional compound Poisson part with two-sided exponential jumps, centered so
that E Y = a_drift.

Components start from their exact stationary law and are advanced with
the exact joint transition of (V, integral of V) between grid times. X(t)
is therefore exact at any grid, however coarse. The trapezoidal route
(:func:`simulate_supou` then :func:`integrate_path`) is kept for paths of Y.

>>> from Intermittency.data import make_geometric_grid
>>> from Intermittency.utils import spawn_replication_rng
>>> quadruple = CharacteristicQuadruple(b_gauss=1.0, pi=MixingSpec(0.5))
>>> config = SupOUSimConfig(quadruple, make_geometric_grid(10, 10, 3), m_components=50)
>>> simulate_integrated_supou(config, spawn_replication_rng(0, 0)).shape
(3,)
>>> theoretical_H(quadruple)
LimitCase(H=0.75, case='i', limit='fbm')
"""

import dataclasses
import logging
import math
import typing
import warnings

import numpy as np
import scipy.integrate
import scipy.special

from Intermittency.data import ProcessModel, TimeGrid
from Intermittency.scenarios import ScenarioSpec
from Intermittency.utils import model

__all__ = ['MixingSpec', 'LevyDriverSpec', 'CharacteristicQuadruple',
           'SupOUSimConfig', 'LimitCase', 'sample_mixing', 'simulate_ou_path',
           'simulate_supou', 'integrate_path', 'simulate_integrated_supou',
           'theoretical_H', 'supou_scenario', 'variance_constant',
           'exact_variance', 'correlation', 'SupOU']

logger = logging.getLogger(__name__)

# burn-in shorter than this many relaxation times 1/xi leaves a component
# visibly out of equilibrium
STATIONARITY_RELAXATIONS = 5.0


##############
# PARAMETERS #
##############


@dataclasses.dataclass(frozen=True)
class MixingSpec:
    """Gamma(alpha, rate) law of the decay rates.

    Its density is regularly varying at 0 with index alpha - 1, with the
    constant slowly varying factor rate^alpha / Gamma(1 + alpha).

    >>> MixingSpec(0.5).ell == 1 / math.gamma(1.5)
    True
    """

    alpha: float = 0.5
    rate: float = 1.0
    family: str = 'gamma'

    def __post_init__(self):
        if self.family != 'gamma':
            raise ValueError('Only gamma mixing is supported, got %r' % self.family)
        if not self.alpha > 0 or not self.rate > 0:
            raise ValueError('Gamma mixing needs alpha > 0 and rate > 0, got '
                             'alpha=%g, rate=%g' % (self.alpha, self.rate))

    @property
    def ell(self):
        return self.rate ** self.alpha / math.gamma(1 + self.alpha)

    def cdf(self, x):
        """P(xi <= x), the regularized lower incomplete gamma function."""
        return scipy.special.gammainc(self.alpha, self.rate * np.asarray(x, dtype=float))


@dataclasses.dataclass(frozen=True)
class LevyDriverSpec:
    """Compound Poisson part of the driver: ``intensity`` jumps per unit
    time, each exponential with mean ``jump_mean``, positive with probability
    ``p_plus``. Zero intensity means no jumps.

    >>> LevyDriverSpec().tag, LevyDriverSpec(2.0, p_plus=1.0).tag
    ('none', 'compound_poisson_exp')
    >>> LevyDriverSpec(2.0, jump_mean=0.5).variance_rate
    1.0
    """

    intensity: float = 0.0
    jump_mean: float = 1.0
    p_plus: float = 0.5

    def __post_init__(self):
        if not self.intensity >= 0:
            raise ValueError('Jump intensity must be >= 0, got %g' % self.intensity)
        if not self.jump_mean > 0:
            raise ValueError('Jump mean must be positive, got %g' % self.jump_mean)
        if not 0 <= self.p_plus <= 1:
            raise ValueError('p_plus must lie in [0, 1], got %g' % self.p_plus)

    @property
    def tag(self):
        if self.is_zero:
            return 'none'
        if self.p_plus in (0.0, 1.0):
            return 'compound_poisson_exp'
        return 'compound_poisson_two_sided'

    @property
    def is_zero(self):
        return self.intensity == 0

    @property
    def mean_jump(self):
        return self.jump_mean * (2 * self.p_plus - 1)

    @property
    def variance_rate(self):
        """Second cumulant per unit time, intensity * E J^2."""
        return self.intensity * 2 * self.jump_mean ** 2

    @property
    def blumenthal_getoor(self):
        """Finite activity: the index is 0."""
        return 0.0

    @property
    def exponential_moment_bound(self):
        """E exp(a|J|) is finite for every a below this bound."""
        return 1 / self.jump_mean

    def scaled(self, factor):
        """Driver with its cumulant multiplied by ``factor``."""
        return dataclasses.replace(self, intensity=self.intensity * factor)

    def sample_jumps(self, k, rng):
        signs = np.where(rng.random(k) < self.p_plus, 1.0, -1.0)
        return signs * rng.exponential(self.jump_mean, k)


@dataclasses.dataclass(frozen=True)
class CharacteristicQuadruple:
    """(a, b, Levy measure, pi): drift, Gaussian variance, jumps and mixing.

    >>> CharacteristicQuadruple()
    Traceback (most recent call last):
        ...
    ValueError: The driver needs a Gaussian part or jumps, got b_gauss=0 and no jumps
    """

    a_drift: float = 0.0
    b_gauss: float = 0.0
    levy_measure: LevyDriverSpec = dataclasses.field(default_factory=LevyDriverSpec)
    pi: MixingSpec = dataclasses.field(default_factory=MixingSpec)

    def __post_init__(self):
        if not self.b_gauss >= 0:
            raise ValueError('b_gauss must be >= 0, got %g' % self.b_gauss)
        if self.b_gauss == 0 and self.levy_measure.is_zero:
            raise ValueError('The driver needs a Gaussian part or jumps, got '
                             'b_gauss=0 and no jumps')

    @property
    def second_cumulant(self):
        """Variance of the driver per unit time."""
        return self.b_gauss + self.levy_measure.variance_rate

    @property
    def is_gaussian(self):
        return self.levy_measure.is_zero


@dataclasses.dataclass(frozen=True)
class SupOUSimConfig:
    """Everything needed to simulate one integrated supOU path.

    :param burn_in: None starts each component from its exact stationary
        law; a number of time units starts from 0 that long before t = 0;
        'auto' uses 10 / median(xi)
    """

    quadruple: CharacteristicQuadruple
    grid: TimeGrid
    m_components: int = 1000
    burn_in: typing.Union[None, float, str] = None

    def __post_init__(self):
        if self.m_components < 1:
            raise ValueError('Need at least one component, got %d' % self.m_components)
        if isinstance(self.burn_in, str):
            if self.burn_in != 'auto':
                raise ValueError('burn_in must be None, a number or "auto", got %r'
                                 % self.burn_in)
        elif self.burn_in is not None and not self.burn_in >= 0:
            raise ValueError('burn_in must be >= 0, got %g' % self.burn_in)


class LimitCase(typing.NamedTuple):
    """Self-similarity index of the limit of X(Tt)/T^H and its case."""

    H: float
    case: str
    limit: str


############
# SAMPLING #
############


def sample_mixing(pi, m, rng):
    """m independent decay rates drawn from ``pi``.

    >>> from Intermittency.utils import spawn_replication_rng
    >>> xi = sample_mixing(MixingSpec(0.5), 4, spawn_replication_rng(0, 0))
    >>> xi.shape, bool((xi > 0).all())
    ((4,), True)
    >>> sample_mixing(MixingSpec(0.5), 0, spawn_replication_rng(0, 0))
    Traceback (most recent call last):
        ...
    ValueError: Need at least one decay rate, got m = 0
    """
    if m < 1:
        raise ValueError('Need at least one decay rate, got m = %d' % m)
    return rng.gamma(pi.alpha, 1 / pi.rate, size=m)


def _integral_deficit(x):
    """(x - 1 + exp(-x)) / x^2, accurate for small x."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 0.5 - x / 6 + x * x / 24,
                    (safe + np.expm1(-safe)) / (safe * safe))


def _cubic_deficit(x):
    """(x - 2(1 - exp(-x)) + (1 - exp(-2x))/2) / x^3, accurate for small x."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-2
    safe = np.where(small, 1.0, x)
    exact = (safe + 2 * np.expm1(-safe) - np.expm1(-2 * safe) / 2) / safe ** 3
    series = 1 / 3 - x / 4 + 7 * x * x / 60 - x ** 3 / 24
    return np.where(small, series, exact)


class _Components(object):
    """Vectorized OU type components advanced by exact transitions.

    :param theta: decay rates
    :param sigma2: Brownian variance per unit (real) time of each driver
    :param rho: jump rate per unit (real) time of each driver
    :param LevyDriverSpec jumps: jump law; its intensity is ignored
    """

    def __init__(self, theta, sigma2, rho, jumps, rng):
        self.theta = np.asarray(theta, dtype=float)
        self.sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=float), self.theta.shape)
        self.rho = np.broadcast_to(np.asarray(rho, dtype=float), self.theta.shape)
        self.jumps = jumps
        self.rng_init, self.rng_gauss, self.rng_jump = rng.spawn(3)
        self.v = np.zeros_like(self.theta)

    def start_stationary(self):
        """Draw V from its stationary law, component by component."""
        theta, rng = self.theta, self.rng_init
        v = np.sqrt(self.sigma2 / (2 * theta)) * rng.standard_normal(theta.shape)
        if np.any(self.rho > 0):
            # jumps at rate rho decaying at rate theta leave a Gamma(rho/theta)
            # amount of each sign
            shape = self.rho / theta
            mean = self.jumps.jump_mean
            up = rng.gamma(shape * self.jumps.p_plus, mean)
            down = rng.gamma(shape * (1 - self.jumps.p_plus), mean)
            v += up - down - shape * self.jumps.mean_jump
        self.v = v

    def step(self, dt):
        """Advance by ``dt``; returns the integral of V over the step."""
        theta = self.theta
        x = theta * dt
        decay = np.exp(-x)
        one_minus = -np.expm1(-x)
        integral = self.v * dt * np.where(x > 0, one_minus / np.where(x > 0, x, 1), 1.0)

        # Brownian part: exact joint Gaussian law of the two increments
        var_v = self.sigma2 * dt * np.where(x > 0, -np.expm1(-2 * x) / (2 * np.where(x > 0, x, 1)), 1.0)
        var_i = self.sigma2 * dt ** 3 * _cubic_deficit(x)
        cov = self.sigma2 * dt ** 2 * 0.5 * np.where(
            x > 0, (one_minus / np.where(x > 0, x, 1)) ** 2, 1.0)
        z = self.rng_gauss.standard_normal((2,) + theta.shape)
        root = np.sqrt(var_v)
        loading = np.divide(cov, root, out=np.zeros_like(cov), where=root > 0)
        residual = np.sqrt(np.clip(var_i - loading ** 2, 0, None))
        new_v = decay * self.v + root * z[0]
        integral = integral + loading * z[0] + residual * z[1]

        if np.any(self.rho > 0):
            counts = self.rng_jump.poisson(self.rho * dt)
            owner = np.repeat(np.arange(len(theta)), counts)
            if len(owner):
                remaining = dt * self.rng_jump.random(len(owner))
                sizes = self.jumps.sample_jumps(len(owner), self.rng_jump)
                th = theta[owner]
                new_v += np.bincount(owner, sizes * np.exp(-th * remaining),
                                     minlength=len(theta))
                tail = remaining * np.where(
                    th * remaining > 0,
                    -np.expm1(-th * remaining) / np.where(th * remaining > 0, th * remaining, 1),
                    1.0)
                integral = integral + np.bincount(owner, sizes * tail,
                                                  minlength=len(theta))
            # compensator of the jump mean
            drift = -self.rho * self.jumps.mean_jump
            new_v += drift * dt * np.where(x > 0, one_minus / np.where(x > 0, x, 1), 1.0)
            integral = integral + drift * dt * dt * _integral_deficit(x)

        self.v = new_v
        return integral


def _start(components, burn_in, xi):
    if burn_in is None:
        components.start_stationary()
        return
    if burn_in == 'auto':
        burn_in = 10 / float(np.median(xi))
    shortest = burn_in * float(np.min(xi))
    if shortest < STATIONARITY_RELAXATIONS:
        warnings.warn('Burn-in of %g time units is only %.3g relaxation times of '
                      'the slowest component; stationarity is not reached'
                      % (burn_in, shortest), RuntimeWarning)
    logger.debug('Burning in %d component(s) for %g time units', len(xi), burn_in)
    if burn_in > 0:
        components.step(burn_in)


def _run(components, grid, include_origin=False):
    """Sums over components of V at the grid times and of the integral of
    V over each grid step."""
    t = np.concatenate([[0.0], grid.t_values])
    y = [components.v.sum()]
    dx = np.empty(len(grid))
    for n, dt in enumerate(np.diff(t)):
        dx[n] = components.step(dt).sum()
        y.append(components.v.sum())
    y = np.asarray(y)
    return (y if include_origin else y[1:]), dx


##############
# SIMULATORS #
##############


def simulate_ou_path(xi, driver, b_gauss, grid, rng, burn_in=None,
                     time_change=False, include_origin=False):
    """One stationary OU type path dV = -xi V dt + dL(t), sampled at the
    grid times.

    Without time change the stationary variance is
    (b_gauss + driver.variance_rate) / (2 xi); with ``time_change`` the
    driver runs at speed xi and the variance is half the driver's.

    :param float xi: decay rate
    :param LevyDriverSpec driver: jump part of L
    :param float b_gauss: Brownian variance of L per unit time
    :param TimeGrid grid: sampling times
    :param numpy.random.Generator rng: random stream
    :param burn_in: see :class:`SupOUSimConfig`
    :param bool include_origin: also return V(0) as the first value
    """
    if not xi > 0:
        raise ValueError('The decay rate must be positive, got %g' % xi)
    speed = xi if time_change else 1.0
    components = _Components([xi], b_gauss * speed, driver.intensity * speed,
                             driver, rng)
    _start(components, burn_in, np.array([xi]))
    return _run(components, grid, include_origin)[0]


def _components(config, rng):
    quadruple, m = config.quadruple, config.m_components
    rng_mix, rng_paths = rng.spawn(2)
    xi = sample_mixing(quadruple.pi, m, rng_mix)
    driver = quadruple.levy_measure.scaled(1 / m)
    components = _Components(xi, quadruple.b_gauss / m * xi, driver.intensity * xi,
                             driver, rng_paths)
    _start(components, config.burn_in, xi)
    return components


def simulate_supou(config, rng, include_origin=False):
    """One path of Y at the grid times (and at 0 with ``include_origin``).

    >>> from Intermittency.data import make_arithmetic_grid
    >>> from Intermittency.utils import spawn_replication_rng
    >>> quadruple = CharacteristicQuadruple(b_gauss=1.0)
    >>> config = SupOUSimConfig(quadruple, make_arithmetic_grid(1, 5), m_components=10)
    >>> simulate_supou(config, spawn_replication_rng(0, 0), include_origin=True).shape
    (6,)
    """
    y, _ = _run(_components(config, rng), config.grid, include_origin)
    return y + config.quadruple.a_drift


def integrate_path(y, grid):
    """X(t_n) by the trapezoidal rule, from Y at 0 followed by Y at the
    grid times.

    >>> from Intermittency.data import make_arithmetic_grid
    >>> integrate_path(np.full(4, 2.0), make_arithmetic_grid(0.5, 3)).tolist()
    [1.0, 2.0, 3.0]
    """
    y = np.asarray(y, dtype=float)
    if len(y) != len(grid) + 1:
        raise ValueError('Need Y at 0 and at the %d grid times, got %d values'
                         % (len(grid), len(y)))
    t = np.concatenate([[0.0], grid.t_values])
    return scipy.integrate.cumulative_trapezoid(y, t)


def simulate_integrated_supou(config, rng):
    """X(t) = integral of Y over [0, t] at the grid times, sampled exactly."""
    _, dx = _run(_components(config, rng), config.grid)
    return np.cumsum(dx) + config.quadruple.a_drift * config.grid.t_values


##########
# THEORY #
##########


def theoretical_H(quadruple, alpha=None, beta_bg=None, gamma_opt=None):
    """Index H of the limit of X(Tt)/T^H, with the case that produces it.

    (i) Gaussian part, alpha < 1: fBm with H = 1 - alpha/2. (ii) no Gaussian
    part, alpha < 1, Blumenthal-Getoor index beta < 1 + alpha: stable Levy
    process with H = 1/(1 + alpha). (iii) 1 + alpha < beta < 2:
    H = 1 - alpha/beta. (iv) alpha > 1: Brownian motion, H = 1/2.

    >>> theoretical_H(CharacteristicQuadruple(levy_measure=LevyDriverSpec(1.0)))
    LimitCase(H=0.6666666666666666, case='ii', limit='stable_levy')
    >>> theoretical_H(CharacteristicQuadruple(b_gauss=1.0), alpha=1.5).H
    0.5
    >>> theoretical_H(CharacteristicQuadruple(b_gauss=1.0), alpha=1.0)
    Traceback (most recent call last):
        ...
    ValueError: alpha = 1 is an uncovered boundary
    """
    alpha = quadruple.pi.alpha if alpha is None else alpha
    beta = quadruple.levy_measure.blumenthal_getoor if beta_bg is None else beta_bg
    if alpha == 1:
        raise ValueError('alpha = 1 is an uncovered boundary')
    if alpha > 1:
        return LimitCase(0.5, 'iv', 'brownian')
    if not 0 < alpha:
        raise ValueError('alpha must be positive, got %g' % alpha)
    if quadruple.b_gauss > 0:
        return LimitCase(1 - alpha / 2, 'i', 'fbm')
    if not 0 <= beta < 2:
        raise ValueError('The Blumenthal-Getoor index must lie in [0, 2), got %g' % beta)
    if beta < 1 + alpha:
        return LimitCase(1 / (1 + alpha), 'ii', 'stable_levy')
    if beta == 1 + alpha:
        raise ValueError('beta = 1 + alpha = %g is an uncovered boundary' % beta)
    if gamma_opt is not None and not beta <= gamma_opt < 2:
        raise ValueError('Case iii needs beta <= gamma < 2, got beta=%g, gamma=%g'
                         % (beta, gamma_opt))
    return LimitCase(1 - alpha / beta, 'iii', 'stable')


def supou_scenario(quadruple, beta_bg=None, gamma=None):
    """Closed-form scenario of the integrated supOU process.

    Gaussian drivers give tau(q) = Hq; drivers with jumps give the finite
    variance breakpoint function, or with ``gamma`` (the largest finite
    moment) one of the infinite-variance functions.

    >>> supou_scenario(CharacteristicQuadruple(levy_measure=LevyDriverSpec(1.0)))
    ScenarioSpec('supou_finite_var', H=0.6666666666666666, alpha=0.5)
    """
    limit = theoretical_H(quadruple, beta_bg=beta_bg, gamma_opt=gamma)
    alpha = quadruple.pi.alpha
    if gamma is not None:
        beta = quadruple.levy_measure.blumenthal_getoor if beta_bg is None else beta_bg
        if limit.case == 'ii':
            return ScenarioSpec('supou_inf_var_i', alpha=alpha, gamma=gamma, beta=beta)
        if limit.case == 'iii':
            return ScenarioSpec('supou_inf_var_ii', alpha=alpha, beta=beta, gamma=gamma)
        raise ValueError('No infinite-variance scenario for case %s' % limit.case)
    if quadruple.is_gaussian:
        return ScenarioSpec('gaussian_supou', b_gauss=quadruple.b_gauss, alpha=alpha)
    return ScenarioSpec('supou_finite_var', H=limit.H, alpha=alpha)


def correlation(pi, u):
    """Correlation of Y at lag u, E exp(-xi u) = (1 + u/rate)^-alpha.

    >>> correlation(MixingSpec(0.5), 3.0)
    0.5
    """
    value = (1 + np.asarray(u, dtype=float) / pi.rate) ** -pi.alpha
    return float(value) if value.ndim == 0 else value


def variance_constant(quadruple):
    """lim Var X(t) / t^{2 - alpha} for alpha in (0, 1).

    >>> round(variance_constant(CharacteristicQuadruple(b_gauss=1.0)), 12)
    1.333333333333
    """
    alpha, rate = quadruple.pi.alpha, quadruple.pi.rate
    if not 0 < alpha < 1:
        raise ValueError('Var X(t) grows like t^{2 - alpha} only for alpha in '
                         '(0, 1), got %g' % alpha)
    return quadruple.second_cumulant * rate ** alpha / ((2 - alpha) * (1 - alpha))


def exact_variance(quadruple, t):
    """Var X(t) = c * integral over [0, t] of (t - w)(1 + w/rate)^-alpha dw,
    c the second cumulant of the driver.

    >>> round(exact_variance(CharacteristicQuadruple(b_gauss=1.0), 1000.0) / 1000 ** 1.5, 3)
    1.272
    """
    alpha, r = quadruple.pi.alpha, quadruple.pi.rate
    end = 1 + t / r
    if alpha == 1:
        integral = (t + r) * math.log(end) - r * (end - 1)
    elif alpha == 2:
        integral = (t + r) * (1 - 1 / end) - r * math.log(end)
    else:
        integral = (t + r) * (end ** (1 - alpha) - 1) / (1 - alpha) - \
            r * (end ** (2 - alpha) - 1) / (2 - alpha)
    return quadruple.second_cumulant * r * integral


#########
# MODEL #
#########


INTEGRATIONS = ('exact', 'trapezoid')


@model('supou')
@dataclasses.dataclass(frozen=True)
class SupOU(ProcessModel):
    """Integrated supOU process X(t) with Gamma(alpha, rate) mixing."""

    alpha: float
    b_gauss: float = 0.0
    intensity: float = 0.0
    jump_mean: float = 1.0
    p_plus: float = 0.5
    rate: float = 1.0
    a_drift: float = 0.0
    m_components: int = 1000
    burn_in: typing.Union[None, float, str] = None
    integration: str = 'exact'

    def __post_init__(self):
        if self.integration not in INTEGRATIONS:
            raise ValueError('Unknown integration %r, expected one of %s' % (
                self.integration, INTEGRATIONS))
        self.quadruple  # validates

    @property
    def quadruple(self):
        return CharacteristicQuadruple(
            a_drift=self.a_drift, b_gauss=self.b_gauss,
            levy_measure=LevyDriverSpec(self.intensity, self.jump_mean, self.p_plus),
            pi=MixingSpec(self.alpha, self.rate))

    def config(self, grid):
        return SupOUSimConfig(self.quadruple, grid, self.m_components, self.burn_in)

    def validate_grid(self, grid):
        if self.integration == 'trapezoid' and not grid.is_uniform:
            raise ValueError('Trapezoidal integration needs a uniform grid, got %r'
                             % grid)
        return grid

    def simulate(self, grid, rng):
        config = self.config(grid)
        if self.integration == 'exact':
            return simulate_integrated_supou(config, rng)
        return integrate_path(simulate_supou(config, rng, include_origin=True), grid)
