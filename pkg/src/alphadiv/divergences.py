"""Alpha-, Renyi- and generic f-divergences between finite measures.

All evaluators return a plain ``float`` that is nonnegative or ``inf``.
Infinity is a legitimate value (mismatched supports), never an error.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .errors import InternalConsistencyError, InvalidOrder
from .measures import MeasurePair

NEG_CLAMP = 1e-12


def _finalize(value):
    value = float(value)
    if math.isnan(value):
        raise InternalConsistencyError("divergence evaluated to NaN")
    if value < 0.0:
        if value >= -NEG_CLAMP:
            return 0.0
        raise InternalConsistencyError(f"negative divergence {value!r}")
    return value


def _check_alpha(alpha):
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise InvalidOrder(f"alpha must be finite, got {alpha!r}")
    return alpha


def _check_renyi_order(alpha):
    alpha = float(alpha)
    if math.isnan(alpha) or alpha < 0.0:
        raise InvalidOrder(f"Renyi order must be >= 0 or inf, got {alpha!r}")
    return alpha


# ---------------------------------------------------------------------------
# generic f-divergence
# ---------------------------------------------------------------------------

def alpha_generator(alpha):
    """Return ``(f, f(0+), lim f(u)/u)`` for the alpha-divergence generator."""
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        return (lambda t: t * math.log(t)), 0.0, math.inf
    if alpha == 0.0:
        return (lambda t: -math.log(t)), math.inf, 0.0
    c = alpha * (alpha - 1.0)

    def f(t):
        return (t ** alpha - t) / c

    f0 = 0.0 if alpha > 0 else math.inf
    slope = math.inf if alpha > 1 else -1.0 / c
    return f, f0, slope


def f_divergence(pair: MeasurePair, f, f_at_0, slope_at_inf):
    """``sum q_i f(p_i / q_i)`` with the zero-mass limit conventions.

    ``f_at_0`` is ``lim_{t->0+} f(t)`` and ``slope_at_inf`` is
    ``lim_{u->inf} f(u)/u``; either may be ``inf``.
    """
    p, q = pair.p.weights, pair.q.weights
    terms = []
    for pi, qi in zip(p, q):
        pi, qi = float(pi), float(qi)
        if pi == 0.0 and qi == 0.0:
            continue
        if qi == 0.0:
            terms.append(pi * slope_at_inf)
        elif pi == 0.0:
            terms.append(qi * f_at_0)
        else:
            terms.append(qi * f(pi / qi))
    if any(t == math.inf for t in terms):
        return math.inf
    return _finalize(math.fsum(terms))


# ---------------------------------------------------------------------------
# alpha-divergence
# ---------------------------------------------------------------------------

def alpha_divergence_pqd(p, q, d, alpha):
    """alpha-divergence from weight arrays with caller-supplied ``d = q - p``."""
    return _finalize(K.alpha_div_one(p, q, d, alpha))


def alpha_divergence(pair: MeasurePair, alpha):
    """D_A^(alpha)(P || Q) for any finite ``alpha``.

    ``alpha`` within 1e-12 of 0 or 1 uses the exact reverse-KL / KL branch.
    """
    alpha = _check_alpha(alpha)
    return alpha_divergence_pqd(pair.p.weights, pair.q.weights, pair.diff, alpha)


def kl_divergence(pair: MeasurePair):
    return alpha_divergence(pair, 1.0)


def pearson_chi2(pair: MeasurePair):
    """sum (p - q)^2 / q."""
    p, q = pair.p.weights, pair.q.weights
    if np.any((q == 0) & (p > 0)):
        return math.inf
    m = q > 0
    return math.fsum((p[m] - q[m]) ** 2 / q[m])


def neyman_chi2(pair: MeasurePair):
    """sum (p - q)^2 / p."""
    return pearson_chi2(pair.swapped())


def hellinger_sq(pair: MeasurePair):
    """Squared Hellinger distance ``0.5 * sum (sqrt p - sqrt q)^2``."""
    p, q = pair.p.weights, pair.q.weights
    return 0.5 * math.fsum((np.sqrt(p) - np.sqrt(q)) ** 2)


# ---------------------------------------------------------------------------
# Renyi divergence
# ---------------------------------------------------------------------------

def _renyi_pqd(p, q, d, alpha):
    if alpha == 0.0:
        outside = math.fsum(q[p == 0])
        if outside >= 1.0:
            return math.inf
        return _finalize(-math.log1p(-outside))
    if math.isinf(alpha):
        m = p > 0
        if np.any(q[m] == 0):
            return math.inf
        return _finalize(math.log(np.max(p[m] / q[m])))
    if abs(alpha - 1.0) <= K.BRANCH_TOL:
        return alpha_divergence_pqd(p, q, d, 1.0)
    t = K.power_excess_rows(p[None, :], q[None, :], d[None, :], alpha)[0]
    if math.isinf(t):
        return math.inf
    if t <= -1.0:
        return math.inf
    return _finalize(math.log1p(t) / (alpha - 1.0))


def renyi_divergence(pair: MeasurePair, alpha):
    """D_R^(alpha)(P || Q) for ``alpha`` in ``[0, inf]``.

    Orders 0, 1 and ``math.inf`` use their limit definitions
    (``-log Q(p > 0)``, KL, and ``log max p/q``). Negative orders raise
    :class:`InvalidOrder`.
    """
    alpha = _check_renyi_order(alpha)
    return _renyi_pqd(pair.p.weights, pair.q.weights, pair.diff, alpha)


def renyi_from_alpha(d_alpha, alpha):
    """Renyi value from an alpha-divergence value, ``log1p(a(a-1)D)/(a-1)``."""
    if math.isinf(d_alpha):
        return math.inf
    arg = alpha * (alpha - 1.0) * d_alpha
    if arg <= -1.0:
        return math.inf
    return math.log1p(arg) / (alpha - 1.0)


# ---------------------------------------------------------------------------
# binary (two-point) forms
# ---------------------------------------------------------------------------

def _check_prob(x, name):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name}={x!r} is not in [0, 1]")
    return x


def _binary_arrays(r, r_c, s, s_c, delta):
    p = np.array([r, r_c])
    q = np.array([s, s_c])
    d = q - p if delta is None else np.array([-delta, delta])
    return p, q, d


def binary_alpha_accurate(r, r_c, s, s_c, alpha, delta=None):
    """Binary alpha-divergence from exact complements ``r_c = 1 - r``.

    ``delta = r - s`` may be passed when it is known more accurately than
    the difference of the rounded ``r`` and ``s``.
    """
    p, q, d = _binary_arrays(r, r_c, s, s_c, delta)
    return alpha_divergence_pqd(p, q, d, alpha)


def binary_renyi_accurate(r, r_c, s, s_c, alpha, delta=None):
    p, q, d = _binary_arrays(r, r_c, s, s_c, delta)
    return _renyi_pqd(p, q, d, alpha)


def binary_alpha_divergence(r, s, alpha):
    """d_A^(alpha)(r || s) between Bernoulli(r) and Bernoulli(s)."""
    r, s = _check_prob(r, "r"), _check_prob(s, "s")
    alpha = _check_alpha(alpha)
    return binary_alpha_accurate(r, 1.0 - r, s, 1.0 - s, alpha)


def binary_renyi_divergence(r, s, alpha):
    """d_R^(alpha)(r || s); ``alpha`` in ``[0, inf]``."""
    r, s = _check_prob(r, "r"), _check_prob(s, "s")
    alpha = _check_renyi_order(alpha)
    return binary_renyi_accurate(r, 1.0 - r, s, 1.0 - s, alpha)
