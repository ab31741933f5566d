"""Numerical checks of the alpha / alpha+1 relations along mixture paths.

Along ``Q_t = (Q - P) t + P`` the alpha-divergences satisfy

    D^(a+1)(P||Q_t) = t^(2-a)/(a+1) * d/dt [t^(a-1) D^(a)(P||Q_t)]      (a != -1)
    D^(a)(P||Q_t)   = (a+1) t^(1-a) * int_0^t s^(a-2) D^(a+1)(P||Q_s) ds (a > -1)

and mirror identities along ``P_t = (P - Q) t + Q``. Each checker evaluates
both sides independently (direct summation against a finite difference or
a quadrature) and returns a :class:`RelationResidual`. Nothing here is used
to *compute* divergences.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate

from .divergences import _check_alpha, alpha_divergence_pqd
from .errors import (
    DegeneratePath,
    InfiniteDivergence,
    InvalidOrder,
    QuadratureNonConvergence,
    StepTooLarge,
    TOutOfRange,
)
from .measures import MeasurePair

QUAD_EPSREL = 1e-12
QUAD_LIMIT = 400


@dataclass(frozen=True)
class RelationResidual:
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    method_detail: str
    alpha: float = math.nan
    t: float = math.nan
    relation: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, lhs, rhs, detail, alpha, t, relation, **extra):
        err = abs(lhs - rhs)
        rel = err / max(abs(lhs), abs(rhs), 1e-300)
        return cls(lhs, rhs, err, rel, detail, alpha, t, relation, extra)

    def to_dict(self):
        return {"relation": self.relation, "alpha": self.alpha, "t": self.t,
                "lhs": self.lhs, "rhs": self.rhs,
                "abs_residual": self.abs_residual,
                "rel_residual": self.rel_residual,
                "method_detail": self.method_detail}


# ---------------------------------------------------------------------------
# path evaluation
# ---------------------------------------------------------------------------

def forward_path_divergence(pair: MeasurePair, tau, alpha):
    """D^(alpha)(P || Q_tau) with exact weight differences ``tau * (q - p)``."""
    p = pair.p.weights
    d = tau * pair.diff
    return alpha_divergence_pqd(p, np.maximum(p + d, 0.0), d, alpha)


def backward_path_divergence(pair: MeasurePair, tau, alpha):
    """D^(alpha)(P_tau || Q) along ``P_tau = (P - Q) tau + Q``."""
    q = pair.q.weights
    d = tau * pair.diff
    return alpha_divergence_pqd(np.maximum(q - d, 0.0), q, d, alpha)


EXTENDED_DPS = 40


def _mp_alpha_div(p, q, alpha):
    # p, q: sequences of mpf; same zero-mass conventions as the float kernel
    if alpha == 1.0:
        return mpmath.fsum(pi * mpmath.log(pi / qi) for pi, qi in zip(p, q) if pi > 0) \
            if all(qi > 0 for pi, qi in zip(p, q) if pi > 0) else mpmath.inf
    if alpha == 0.0:
        return _mp_alpha_div(q, p, 1.0)
    a = mpmath.mpf(alpha)
    terms = []
    for pi, qi in zip(p, q):
        if pi > 0 and qi > 0:
            terms.append(pi ** a * qi ** (1 - a))
        elif pi > 0 and alpha > 1:
            return mpmath.inf
        elif qi > 0 and alpha < 0:
            return mpmath.inf
    return (mpmath.fsum(terms) - 1) / (a * (a - 1))


def _mp_path(pair, tau, alpha, forward):
    """Path divergence in ``EXTENDED_DPS``-digit arithmetic (``tau`` an mpf)."""
    # renormalize exactly: float weights sum to 1 only up to rounding, and
    # that offset would enter (S - 1) as an h-independent residual
    p = [mpmath.mpf(float(x)) for x in pair.p.weights]
    q = [mpmath.mpf(float(x)) for x in pair.q.weights]
    sp, sq = mpmath.fsum(p), mpmath.fsum(q)
    p = [x / sp for x in p]
    q = [x / sq for x in q]
    if forward:
        return _mp_alpha_div(p, [pi + tau * (qi - pi) for pi, qi in zip(p, q)], alpha)
    return _mp_alpha_div([qi + tau * (pi - qi) for pi, qi in zip(p, q)], q, alpha)


def _check_t(t):
    t = float(t)
    if not 0.0 < t <= 1.0:
        raise TOutOfRange(f"t={t!r} must lie in (0, 1]")
    return t


def _finite(x, what):
    if not math.isfinite(x):
        raise InfiniteDivergence(f"{what} is infinite")
    return x


def _derivative(g, t, h, richardson):
    """Second-order difference of ``g`` at ``t``; one-sided when ``t + h > 1``."""
    def once(hh):
        if t - hh <= 0:
            raise StepTooLarge(f"t - h = {float(t - hh)!r} must be positive")
        if t + hh <= 1:
            return (g(t + hh) - g(t - hh)) / (2 * hh), "central"
        if t - 2 * hh <= 0:
            raise StepTooLarge("one-sided difference needs t - 2h > 0")
        return (3 * g(t) - 4 * g(t - hh) + g(t - 2 * hh)) / (2 * hh), "backward"

    d1, kind = once(h)
    if not richardson:
        return d1, f"{kind} difference h={float(h):.3g}"
    d2, _ = once(h / 2)
    return (4 * d2 - d1) / 3, f"{kind} difference h={float(h):.3g} + Richardson"


def default_step(t):
    return 1e-5 * max(t, 1.0)


# ---------------------------------------------------------------------------
# differential relations
# ---------------------------------------------------------------------------

def _diff_check(pair, alpha, t, h, richardson, precision, forward):
    # forward: lhs order alpha+1, g uses order alpha, g = t^(alpha-1) D
    # backward: lhs order alpha, g uses order alpha+1, g = t^(-alpha-1) D
    t = _check_t(t)
    h = default_step(t) if h is None else float(h)
    if precision not in ("double", "extended"):
        raise ValueError(f"precision must be 'double' or 'extended', got {precision!r}")
    lhs_order, g_order = (alpha + 1.0, alpha) if forward else (alpha, alpha + 1.0)
    g_pow = alpha - 1.0 if forward else -alpha - 1.0
    scale_pow = 2.0 - alpha if forward else 2.0 + alpha
    scale_den = alpha + 1.0 if forward else 1.0 - alpha
    path = forward_path_divergence if forward else backward_path_divergence
    name = "diff-fwd" if forward else "diff-bwd"

    lhs = _finite(path(pair, t, lhs_order), "left-hand divergence")
    if precision == "double":
        def g(tau):
            return tau ** g_pow * _finite(path(pair, tau, g_order), "path divergence")
        deriv, detail = _derivative(g, t, h, richardson)
        rhs = t ** scale_pow / scale_den * deriv
        return RelationResidual.build(lhs, rhs, detail, alpha, t, name)

    with mpmath.workdps(EXTENDED_DPS):
        def g(tau):
            val = _mp_path(pair, tau, g_order, forward)
            if not mpmath.isfinite(val):
                raise InfiniteDivergence("path divergence is infinite")
            return tau ** g_pow * val
        tm, hm = mpmath.mpf(t), mpmath.mpf(h)
        lhs_mp = _mp_path(pair, tm, lhs_order, forward)
        deriv, detail = _derivative(g, tm, hm, richardson)
        rhs_mp = tm ** scale_pow / scale_den * deriv
        err = abs(lhs_mp - rhs_mp)
        rel = err / max(abs(lhs_mp), abs(rhs_mp), mpmath.mpf("1e-300"))
    return RelationResidual(float(lhs_mp), float(rhs_mp), float(err), float(rel),
                            detail + f", {EXTENDED_DPS}-digit arithmetic",
                            alpha, t, name)


def check_diff_relation_fwd(pair: MeasurePair, alpha, t, h=None,
                            richardson=False, precision="extended") -> RelationResidual:
    """Check ``D^(a+1)(P||Q_t) = t^(2-a)/(a+1) d/dt[t^(a-1) D^(a)(P||Q_t)]``.

    With ``precision="extended"`` the path divergences inside the difference
    quotient are summed in 40-digit arithmetic, so the residual reflects the
    O(h^2) truncation error rather than float64 cancellation (which at
    ``h = 1e-5`` is of the same size). ``"double"`` uses the float kernel.
    """
    alpha = _check_alpha(alpha)
    if alpha == -1.0:
        raise InvalidOrder("forward differential relation excludes alpha = -1")
    return _diff_check(pair, alpha, t, h, richardson, precision, True)


def check_diff_relation_bwd(pair: MeasurePair, alpha, t, h=None,
                            richardson=False, precision="extended") -> RelationResidual:
    """Check ``D^(a)(P_t||Q) = t^(2+a)/(1-a) d/dt[t^(-a-1) D^(a+1)(P_t||Q)]``."""
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        raise InvalidOrder("backward differential relation excludes alpha = 1")
    return _diff_check(pair, alpha, t, h, richardson, precision, False)


# ---------------------------------------------------------------------------
# integral relations
# ---------------------------------------------------------------------------

def _chi2_half(base, other):
    """``0.5 * sum (other - base)^2 / base``: the ``s -> 0`` limit of D / s^2."""
    diff2 = (other - base) ** 2
    if np.any((base == 0) & (diff2 > 0)):
        raise QuadratureNonConvergence(
            "integrand is unbounded at s = 0: the supports differ")
    m = base > 0
    return 0.5 * math.fsum(diff2[m] / base[m])


def _chi2_half_or_inf(base, other):
    try:
        return _chi2_half(base, other)
    except QuadratureNonConvergence:
        return math.inf


def _algebraic_quad(h, t, exponent):
    """``int_0^t s**exponent * h(s) ds`` for smooth ``h`` (QUADPACK QAWS)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            out = integrate.quad(
                h, 0.0, t, weight="alg", wvar=(exponent, 0.0),
                epsabs=0.0, epsrel=QUAD_EPSREL, limit=QUAD_LIMIT,
                full_output=True)
        except integrate.IntegrationWarning as exc:
            raise QuadratureNonConvergence(str(exc)) from None
    if len(out) > 3:
        raise QuadratureNonConvergence(str(out[3]))
    val, err, info = out[:3]
    if not math.isfinite(val):
        raise QuadratureNonConvergence("quadrature returned a non-finite value")
    detail = (f"QAWS s^{exponent:g} weight, {info['neval']} evals, "
              f"est_err={err:.2e}")
    return val, detail


def check_integral_relation(pair: MeasurePair, alpha, t) -> RelationResidual:
    """Check ``D^(a)(P||Q_t) = (a+1) t^(1-a) int_0^t s^(a-2) D^(a+1)(P||Q_s) ds``.

    The integrand is written as ``s^a * [D^(a+1)(P||Q_s) / s^2]``; the bracket
    tends to a constant as ``s -> 0`` so the endpoint singularity is carried
    entirely by the algebraic weight.
    """
    alpha = _check_alpha(alpha)
    if not alpha > -1.0:
        raise InvalidOrder("forward integral relation needs alpha > -1")
    t = _check_t(t)
    lhs = _finite(forward_path_divergence(pair, t, alpha), "D^(alpha)(P||Q_t)")
    _finite(forward_path_divergence(pair, t, alpha + 1.0), "D^(alpha+1)(P||Q_t)")

    h0 = _chi2_half(pair.p.weights, pair.q.weights)

    def h(s):
        if s == 0.0:
            return h0
        return forward_path_divergence(pair, s, alpha + 1.0) / (s * s)

    integral, detail = _algebraic_quad(h, t, alpha)
    rhs = (alpha + 1.0) * t ** (1.0 - alpha) * integral
    return RelationResidual.build(lhs, rhs, detail, alpha, t, "int-fwd")


def check_integral_relation_bwd(pair: MeasurePair, alpha, t) -> RelationResidual:
    """Check ``D^(a+1)(P_t||Q) = (1-a) t^(1+a) int_0^t s^(-a-2) D^(a)(P_s||Q) ds``."""
    alpha = _check_alpha(alpha)
    if not alpha < 1.0:
        raise InvalidOrder("backward integral relation needs alpha < 1")
    t = _check_t(t)
    lhs = _finite(backward_path_divergence(pair, t, alpha + 1.0), "D^(alpha+1)(P_t||Q)")
    _finite(backward_path_divergence(pair, t, alpha), "D^(alpha)(P_t||Q)")

    h0 = _chi2_half(pair.q.weights, pair.p.weights)

    def h(s):
        if s == 0.0:
            return h0
        return backward_path_divergence(pair, s, alpha) / (s * s)

    integral, detail = _algebraic_quad(h, t, -alpha)
    rhs = (1.0 - alpha) * t ** (1.0 + alpha) * integral
    return RelationResidual.build(lhs, rhs, detail, alpha, t, "int-bwd")


# ---------------------------------------------------------------------------
# small-t behaviour
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderFit:
    """Log-log fit of ``t^(a-1) D^(a)(P||Q_t)`` for small ``t``.

    ``limit_value`` is ``D^(a)(P||Q_t)/t^2`` at the smallest ``t``; its
    theoretical limit is ``0.5 * sum (p - q)^2 / p`` (``neyman_constant``).
    ``pearson_constant`` is ``0.5 * sum (p - q)^2 / q`` for comparison.
    """

    alpha: float
    slope: float
    expected_slope: float
    limit_value: float
    neyman_constant: float
    pearson_constant: float
    ts: tuple = ()

    @property
    def limit_ratio(self):
        return self.limit_value / self.neyman_constant

    @property
    def pearson_ratio(self):
        return self.limit_value / self.pearson_constant

    def to_dict(self):
        return {"alpha": self.alpha, "slope": self.slope,
                "expected_slope": self.expected_slope,
                "limit_value": self.limit_value,
                "neyman_constant": self.neyman_constant,
                "pearson_constant": self.pearson_constant,
                "limit_ratio": self.limit_ratio}


def small_t_order(pair: MeasurePair, alpha, ts=None) -> OrderFit:
    """Fit the small-``t`` exponent of ``t^(a-1) D^(a)(P||Q_t)`` (expected ``a+1``)."""
    alpha = _check_alpha(alpha)
    p, q = pair.p.weights, pair.q.weights
    if np.array_equal(p, q):
        raise DegeneratePath("P == Q: the path is constant")
    ts = np.logspace(-4, -2, 9) if ts is None else np.asarray(ts, dtype=float)
    vals = np.array([forward_path_divergence(pair, t, alpha) for t in ts])
    if not np.all(np.isfinite(vals)):
        raise InfiniteDivergence("divergence is infinite near t = 0")
    g = ts ** (alpha - 1.0) * vals
    slope = float(np.polyfit(np.log(ts), np.log(g), 1)[0])
    t0 = float(ts.min())
    limit_value = forward_path_divergence(pair, t0, alpha) / t0 ** 2
    neyman = _chi2_half_or_inf(p, q)
    pearson = _chi2_half_or_inf(q, p)
    return OrderFit(alpha, slope, alpha + 1.0, limit_value, neyman, pearson,
                    tuple(float(t) for t in ts))
