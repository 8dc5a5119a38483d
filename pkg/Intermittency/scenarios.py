r"""Closed-form scaling functions and their conjugates.

Each scenario gives tau as a :class:`ScalingFunction` and tau* as a
:class:`ConjugateResult`. They are the oracles against which estimates
and large-deviation rates are checked.

>>> spec = ScenarioSpec('biscale', H=0.6, b=1.0, a=0.5)
>>> spec.tau()(2), spec.tau_star()(1.0)
(1.5, 0.5)
>>> intermittency_of(spec.tau())
(True, (1.0, 2.0))
"""

import bisect
import math

import scipy.special

from Intermittency.data import ConjugateResult, PiecewiseLinear, ScalingFunction
from Intermittency.utils import INF

__all__ = ['tau_all_moments', 'tau_star_all_moments', 'tau_finite_window',
           'tau_star_finite_window', 'tau_biscale', 'tau_star_biscale',
           'tau_triscale', 'tau_supou_finite_var', 'tau_star_supou_finite_var',
           'tau_supou_inf_var', 'tau_star_supou_inf_var', 'tau_gaussian_supou',
           'gaussian_rate_function', 'QuadraticRate', 'intermittency_of',
           'negative_q_bound', 'ScenarioSpec']


##########################
# SELF-SIMILAR SCENARIOS #
##########################


def tau_all_moments(H):
    """tau(q) = Hq on the whole line: all moments converge.

    >>> tau_all_moments(0.625)(2), tau_all_moments(0.5)(-1)
    (1.25, -0.5)
    """
    if not H > 0:
        raise ValueError('H must be positive, got %g' % H)
    return ScalingFunction([], [H])


def tau_star_all_moments(H):
    """tau*(x) = 0 at x = H and +inf elsewhere; E = {H}.

    >>> star = tau_star_all_moments(0.5)
    >>> star(0.5), star(0.6), star.exposed_points
    (0.0, inf, (0.5,))
    """
    tau_all_moments(H)
    return ConjugateResult(PiecewiseLinear([], [], lo=H, hi=H, value=0.0, at=H),
                           [H])


def _check_window(q_lo, q_hi):
    if not q_lo < 0 < q_hi:
        raise ValueError('Zero must be inside the moment window, got '
                         '(%g, %g)' % (q_lo, q_hi))


def tau_finite_window(H, q_lo, q_hi):
    """tau(q) = Hq on [q_lo, q_hi] and +inf outside.

    >>> tau = tau_finite_window(0.625, -1, 3)
    >>> tau(2), tau(4)
    (1.25, inf)
    """
    _check_window(q_lo, q_hi)
    return ScalingFunction([], [H], lo=q_lo, hi=q_hi)


def tau_star_finite_window(H, q_lo, q_hi):
    """tau*(x) = q_lo (x - H) left of H and q_hi (x - H) right of H.

    An infinite window end makes tau* infinite on that side of H.

    >>> star = tau_star_finite_window(0.625, -1, 3)
    >>> star(0.625), round(star(0.825), 12), round(star(0.425), 12)
    (0.0, 0.6, 0.2)
    >>> tau_star_finite_window(0.625, -1, INF)(0.7)
    inf
    """
    _check_window(q_lo, q_hi)
    lo = hi = H
    slopes = []
    if math.isfinite(q_lo):
        lo = -INF
        slopes.append(q_lo)
    if math.isfinite(q_hi):
        hi = INF
        slopes.append(q_hi)
    knots = [H] if len(slopes) == 2 else []
    return ConjugateResult(PiecewiseLinear(knots, slopes, lo=lo, hi=hi,
                                           value=0.0, at=H), [H])


########################
# MULTISCALE SCENARIOS #
########################


def _check_scales(H, b, a):
    if not 0 < H < b:
        raise ValueError('Scales must satisfy 0 < H < b, got H=%g, b=%g' % (H, b))
    if not a > 0:
        raise ValueError('Exponent must satisfy a > 0, got a=%g' % a)


def tau_biscale(H, b, a):
    """tau(q) = Hq up to the breakpoint a/(b - H), bq - a beyond.

    >>> tau = tau_biscale(0.6, 1, 0.5)
    >>> tau.knots, tau(1.25), tau(2), tau(0)
    ((1.25,), 0.75, 1.5, 0.0)
    """
    _check_scales(H, b, a)
    return ScalingFunction([a / (b - H)], [H, b])


def tau_star_biscale(H, b, a):
    """tau* is linear with slope a/(b - H) on [H, b] and +inf outside;
    E = {H, b}.

    >>> star = tau_star_biscale(0.6, 1, 0.5)
    >>> star(0.6), star(1), round(star(0.8), 12), star(1.1)
    (0.0, 0.5, 0.25, inf)
    """
    _check_scales(H, b, a)
    return ConjugateResult(PiecewiseLinear([], [a / (b - H)], lo=H, hi=b,
                                           value=0.0, at=H), [H, b])


def tau_triscale(H, b, a):
    """The three-scale model has the biscale scaling function: the
    intermediate scale t^{(H+b)/2} never dominates a moment."""
    return tau_biscale(H, b, a)


###################
# SUPOU SCENARIOS #
###################


def tau_supou_finite_var(H, alpha):
    """tau(q) = Hq up to alpha/(1 - H), q - alpha beyond; known for q >= 0.

    This is the biscale function with b = 1 and a = alpha.

    >>> tau = tau_supou_finite_var(2 / 3, 0.5)
    >>> round(tau(1.5), 12), round(tau(2), 12), tau_supou_finite_var(0.75, 0.5)(1)
    (1.0, 1.5, 0.75)
    """
    if not 0 < H < 1:
        raise ValueError('H must lie in (0, 1), got %g' % H)
    if not alpha > 0:
        raise ValueError('alpha must be positive, got %g' % alpha)
    return ScalingFunction([alpha / (1 - H)], [H, 1.0], lo=0.0, partial=True)


def tau_star_supou_finite_var(H, alpha):
    """tau* on [H, 1] is the line through (H, 0) and (1, alpha), +inf for
    x > 1; left of H only the lower envelope 0 is known.

    >>> star = tau_star_supou_finite_var(2 / 3, 0.5)
    >>> round(star(1), 12), star(2 / 3), star(1.2)
    (0.5, 0.0, inf)
    >>> star.lower_envelope_only
    ((-inf, 0.6666666666666666),)
    """
    tau_supou_finite_var(H, alpha)
    f = PiecewiseLinear([H], [0.0, alpha / (1 - H)], hi=1.0, value=0.0, at=H)
    return ConjugateResult(f, [H, 1.0], lower_envelope_only=[(-INF, H)])


def _inf_var_parameters(case, alpha, beta, gamma):
    """Validate and return (H, breakpoint) of the infinite-variance cases."""
    if not 0 < alpha < 1:
        raise ValueError('alpha must lie in (0, 1), got %g' % alpha)
    if case in ('I', 1):
        if not 0 <= beta < 1 + alpha < gamma < 2:
            raise ValueError('Case I needs beta < 1 + alpha < gamma < 2, got '
                             'beta=%g, alpha=%g, gamma=%g' % (beta, alpha, gamma))
        return 1 / (1 + alpha), 1 + alpha
    if case in ('II', 2):
        if not 1 + alpha < beta <= gamma < 2:
            raise ValueError('Case II needs 1 + alpha < beta <= gamma < 2, got '
                             'beta=%g, alpha=%g, gamma=%g' % (beta, alpha, gamma))
        return 1 - alpha / beta, beta
    raise ValueError('Unknown infinite-variance case %r' % (case,))


def tau_supou_inf_var(case, alpha, beta, gamma):
    """tau on [0, gamma]: Hq up to the breakpoint, q - alpha beyond.

    >>> tau = tau_supou_inf_var('I', 0.5, 0.0, 1.8)
    >>> round(tau(1.5), 12), round(tau(1.8), 12), tau(1.9)
    (1.0, 1.3, inf)
    """
    H, breakpoint = _inf_var_parameters(case, alpha, beta, gamma)
    knots = [breakpoint] if breakpoint < gamma else []
    return ScalingFunction(knots, [H, 1.0][:len(knots) + 1], lo=0.0, hi=gamma,
                           partial=True)


def tau_star_supou_inf_var(case, alpha, beta, gamma):
    """tau* through (H, 0) and (1, alpha) with slope gamma past x = 1.

    Case I has H = 1/(1 + alpha) and slope 1 + alpha on [H, 1]; case II has
    H = 1 - alpha/beta and slope beta. Left of H only the lower envelope is
    known.

    >>> star = tau_star_supou_inf_var('I', 0.5, 0.0, 1.8)
    >>> round(star(1), 12), round(star(1 / 1.5), 12), round(star(1.1), 12)
    (0.5, 0.0, 0.68)
    """
    H, breakpoint = _inf_var_parameters(case, alpha, beta, gamma)
    f = PiecewiseLinear([H, 1.0], [0.0, breakpoint, gamma], value=0.0, at=H)
    return ConjugateResult(f, [H, 1.0], lower_envelope_only=[(-INF, H)])


def _gaussian_hurst(alpha):
    if not alpha > 0 or alpha == 1:
        raise ValueError('alpha must be positive and not 1, got %g' % alpha)
    return 1 - alpha / 2 if alpha < 1 else 0.5


def tau_gaussian_supou(b_gauss, alpha):
    """Gaussian supOU: tau(q) = Hq with H = 1 - alpha/2 (1/2 when
    alpha > 1) on (-1, inf); no intermittency.

    >>> tau_gaussian_supou(1.0, 0.5)(2)
    1.5
    """
    if not b_gauss > 0:
        raise ValueError('b_gauss must be positive, got %g' % b_gauss)
    return tau_finite_window(_gaussian_hurst(alpha), -1.0, INF)


class QuadraticRate(object):
    """x -> coefficient * x^2, the Gaussian large-deviation rate function.

    >>> rate = gaussian_rate_function(1.0, 0.5)
    >>> rate(0), round(rate(1), 4)
    (0.0, 0.4231)
    >>> round(rate.sigma_tilde_sq * 1.5 * 0.5 / math.gamma(1.5), 12)
    1.0
    """

    def __init__(self, coefficient, sigma_tilde_sq=None):
        if not coefficient > 0:
            raise ValueError('Coefficient must be positive, got %g' % coefficient)
        self.coefficient = float(coefficient)
        self.sigma_tilde_sq = sigma_tilde_sq

    def __call__(self, x):
        return self.coefficient * x * x

    def __repr__(self):
        return 'QuadraticRate(%g x^2)' % self.coefficient

    def conjugate(self):
        """The conjugate theta^2 / (4 coefficient): the limiting cumulant."""
        return QuadraticRate(1 / (4 * self.coefficient))


def gaussian_rate_function(b_gauss, alpha):
    """Rate function of X(t)/t in the Gaussian supOU case.

    Lambda*(x) = x^2 (2 - alpha)(1 - alpha) / (2 b Gamma(1 + alpha)), and
    sigma~^2 = b Gamma(1 + alpha) / ((2 - alpha)(1 - alpha)).
    """
    if not b_gauss > 0:
        raise ValueError('b_gauss must be positive, got %g' % b_gauss)
    if not 0 < alpha < 1:
        raise ValueError('alpha must lie in (0, 1), got %g' % alpha)
    shape = float((2 - alpha) * (1 - alpha) / scipy.special.gamma(1 + alpha))
    return QuadraticRate(shape / (2 * b_gauss), sigma_tilde_sq=b_gauss / shape)


##############
# PROPERTIES #
##############


def negative_q_bound(sf, q):
    """Lower bound q * inf_{q'>0} tau(q')/q' of tau(q) for q < 0.

    >>> negative_q_bound(tau_biscale(0.6, 1, 0.5), -2)
    -1.2
    """
    if not q < 0:
        raise ValueError('The bound applies to q < 0, got %g' % q)
    if sf.hi <= 0:
        raise ValueError('%r is not finite for any q > 0' % sf)
    # tau(q)/q is nondecreasing, so the infimum is the right slope at 0
    return q * sf.slopes[bisect.bisect_right(sf.knots, 0.0)]


def _witness(sf, candidates):
    candidates = sorted(q for q in set(candidates)
                        if q != 0 and math.isfinite(q) and sf.lo <= q <= sf.hi)
    for p, r in zip(candidates, candidates[1:]):
        if sf.ratio(p) < sf.ratio(r) - 1e-12:
            return p, r


def intermittency_of(sf):
    """Whether tau(p)/p < tau(r)/r for some p < r, with a witness pair.

    Pairs of consecutive integers are tried first.

    >>> intermittency_of(tau_all_moments(0.6))
    (False, None)
    >>> intermittency_of(tau_supou_finite_var(2 / 3, 0.5))
    (True, (1.0, 2.0))
    """
    witness = _witness(sf, [float(q) for q in range(-10, 11)])
    if witness is None:
        candidates = [sf.lo, sf.hi, -1.0, 1.0]
        for knot in sf.knots:
            candidates += [knot, 2 * knot, knot / 2]
        witness = _witness(sf, candidates)
    return (witness is not None, witness)


#################
# SCENARIO SPEC #
#################


def _check_supou_hurst(H, alpha):
    """H must be one of the limit exponents for the given alpha."""
    if alpha > 1:
        allowed = abs(H - 0.5) < 1e-12
    elif alpha < 1:
        allowed = 1 / (1 + alpha) - 1e-12 <= H <= 1 - alpha / 2 + 1e-12
    else:
        allowed = False
    if not allowed:
        raise ValueError('H=%g is not a limit exponent for alpha=%g' % (H, alpha))


# tag -> (parameter names with defaults, tau, tau*)
SCENARIOS = {
    'all_moments': ((('H', None),), tau_all_moments, tau_star_all_moments),
    'finite_window': ((('H', None), ('q_lo', None), ('q_hi', None)),
                      tau_finite_window, tau_star_finite_window),
    'biscale': ((('H', None), ('b', None), ('a', None)),
                tau_biscale, tau_star_biscale),
    'triscale': ((('H', None), ('b', None), ('a', None)),
                 tau_triscale, tau_star_biscale),
    'supou_finite_var': ((('H', None), ('alpha', None)),
                         tau_supou_finite_var, tau_star_supou_finite_var),
    'supou_inf_var_i': ((('alpha', None), ('gamma', None), ('beta', 0.0)),
                        lambda alpha, gamma, beta: tau_supou_inf_var('I', alpha, beta, gamma),
                        lambda alpha, gamma, beta: tau_star_supou_inf_var('I', alpha, beta, gamma)),
    'supou_inf_var_ii': ((('alpha', None), ('beta', None), ('gamma', None)),
                         lambda alpha, beta, gamma: tau_supou_inf_var('II', alpha, beta, gamma),
                         lambda alpha, beta, gamma: tau_star_supou_inf_var('II', alpha, beta, gamma)),
    'gaussian_supou': ((('b_gauss', None), ('alpha', None)),
                       tau_gaussian_supou,
                       lambda b_gauss, alpha: tau_star_finite_window(
                           _gaussian_hurst(alpha), -1.0, INF)),
}


class ScenarioSpec(object):
    r"""A named scenario with its parameters.

    :param str tag: one of :data:`SCENARIOS`
    :param params: scenario parameters by name

    >>> ScenarioSpec('finite_window', H=0.625, q_lo=-1, q_hi=3)
    ScenarioSpec('finite_window', H=0.625, q_lo=-1.0, q_hi=3.0)
    >>> ScenarioSpec('biscale', H=1.0, b=0.6, a=0.5)
    Traceback (most recent call last):
        ...
    ValueError: Scales must satisfy 0 < H < b, got H=1, b=0.6
    """

    def __init__(self, tag, **params):
        if tag not in SCENARIOS:
            raise ValueError('Unknown scenario %r, expected one of %s' % (
                tag, sorted(SCENARIOS)))
        names, self._tau, self._tau_star = SCENARIOS[tag]
        missing = [name for name, default in names
                   if default is None and name not in params]
        unknown = set(params) - {name for name, _ in names}
        if missing or unknown:
            raise ValueError('Scenario %s needs parameters %s, missing %s, '
                             'unknown %s' % (tag, [name for name, _ in names],
                                             missing, sorted(unknown)))
        self.tag = tag
        self.params = {name: float(params.get(name, default))
                       for name, default in names}
        if tag == 'supou_finite_var':
            _check_supou_hurst(self.params['H'], self.params['alpha'])
        self.tau()  # validates

    def __repr__(self):
        return 'ScenarioSpec(%r, %s)' % (self.tag, ', '.join(
            '%s=%r' % item for item in self.params.items()))

    def __eq__(self, other):
        return isinstance(other, ScenarioSpec) and self.tag == other.tag and \
            self.params == other.params

    __hash__ = None

    def tau(self):
        """Scaling function of the scenario."""
        return self._tau(**self.params)

    def tau_star(self):
        """Conjugate of the scaling function, with exposed points."""
        return self._tau_star(**self.params)

    def to_dict(self):
        return dict(self.params, tag=self.tag)

    @classmethod
    def from_dict(cls, descriptor):
        """Rebuild from :meth:`to_dict` output or a config section."""
        descriptor = dict(descriptor)
        tag = descriptor.pop('tag', None)
        return cls(tag, **descriptor)
