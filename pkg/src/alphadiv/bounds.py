"""Tight lower bounds under prescribed means and variances.

For a gap ``a = m_P - m_Q != 0`` the extremal pair is the unique two-point
pair (R, S) with the prescribed moments; its binary divergence is the
infimum of D_A^(alpha) over the constraint set exactly when
``-1 <= alpha <= 2``. Equal means give infimum 0 for every alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .divergences import (
    _check_alpha,
    _check_renyi_order,
    binary_alpha_accurate,
    binary_renyi_accurate,
)
from .errors import EqualMeans, InvalidOrder
from .measures import MeasurePair, MomentSpec, make_measure, make_pair

EQUAL_MEANS_TOL = 1e-12
ALPHA_TIGHT = (-1.0, 2.0)
RENYI_TIGHT = (0.0, 2.0)


@dataclass(frozen=True)
class BinaryPair:
    """Extremal two-point pair: R(u1) = r, S(u1) = s, R(u2) = 1 - r, S(u2) = 1 - s.

    ``r_c`` and ``s_c`` hold ``1 - r`` and ``1 - s`` computed without
    cancellation, so weights near 0 or 1 keep full relative precision.
    """

    r: float
    s: float
    u1: float
    u2: float
    a: float
    v: float
    r_c: float
    s_c: float

    @property
    def delta(self):
        """``r - s``, equal to ``a / (2 v)``."""
        return self.a / (2.0 * self.v)

    def to_pair(self) -> MeasurePair:
        pts = [self.u1, self.u2]
        return make_pair(make_measure(pts, [self.r, self.r_c]),
                         make_measure(pts, [self.s, self.s_c]))

    def to_dict(self):
        return {"r": self.r, "s": self.s, "u1": self.u1, "u2": self.u2,
                "a": self.a, "v": self.v}


def _split(w, signed_b, var, a2):
    # returns (x, 1 - x) for x = (w + signed_b) / (2w), using x(1-x) = var*a^2/w^2
    prod = var * a2 / (w * w)
    if signed_b >= 0.0:
        x = (w + signed_b) / (2.0 * w)
        return x, prod / x
    xc = (w - signed_b) / (2.0 * w)
    return prod / xc, xc


def binary_pair_from_moments(spec: MomentSpec) -> BinaryPair:
    """Construct the unique two-point pair matching ``spec``.

    Raises :class:`EqualMeans` when ``|m_P - m_Q| <= 1e-12``. With
    ``sigma_p = 0`` the point carrying no P-mass is recovered from Q's
    moment equations as ``m_Q - sigma_q**2 / a``.
    """
    a = spec.mean_p - spec.mean_q
    if abs(a) <= EQUAL_MEANS_TOL:
        raise EqualMeans(f"means differ by {a!r}; the infimum is 0")
    vp, vq = spec.sigma_p ** 2, spec.sigma_q ** 2
    a2 = a * a
    w = math.sqrt((vq - vp) ** 2 + 2.0 * a2 * (vp + vq) + a2 * a2)
    v = w / (2.0 * abs(a))
    sg = 1.0 if a > 0 else -1.0
    r, r_c = _split(w, sg * (vq - vp + a2), vp, a2)
    s, s_c = _split(w, sg * (vq - vp - a2), vq, a2)
    m = spec.mean_p
    if r > 0.0 and r_c > 0.0:
        u1 = m + spec.sigma_p * math.sqrt(r_c / r)
        u2 = m - spec.sigma_p * math.sqrt(r / r_c)
    elif r_c == 0.0:
        u1, u2 = m, spec.mean_q - vq / a
    else:
        u1, u2 = spec.mean_q - vq / a, m
    return BinaryPair(r=r, s=s, u1=u1, u2=u2, a=a, v=v, r_c=r_c, s_c=s_c)


@dataclass(frozen=True)
class BoundReport:
    bound: float
    tight_guaranteed: bool
    witness: BinaryPair | None
    equal_means: bool

    def to_dict(self):
        return {"bound": self.bound,
                "tight_guaranteed": self.tight_guaranteed,
                "equal_means": self.equal_means,
                "witness": None if self.witness is None else self.witness.to_dict()}


def _is_equal_means(spec):
    return abs(spec.mean_p - spec.mean_q) <= EQUAL_MEANS_TOL


def alpha_lower_bound(spec: MomentSpec, alpha) -> BoundReport:
    """Lower bound for D_A^(alpha)(P||Q) over pairs with the given moments.

    Outside ``[-1, 2]`` the binary value is still returned but
    ``tight_guaranteed`` is False: it is then not a valid bound in general.
    """
    alpha = _check_alpha(alpha)
    tight = ALPHA_TIGHT[0] <= alpha <= ALPHA_TIGHT[1]
    if _is_equal_means(spec):
        return BoundReport(0.0, tight, None, True)
    bp = binary_pair_from_moments(spec)
    val = binary_alpha_accurate(bp.r, bp.r_c, bp.s, bp.s_c, alpha, bp.delta)
    return BoundReport(val, tight, bp, False)


def renyi_lower_bound(spec: MomentSpec, alpha) -> BoundReport:
    """Lower bound for D_R^(alpha)(P||Q), ``0 <= alpha <= 2``."""
    alpha = _check_renyi_order(alpha)
    if not RENYI_TIGHT[0] <= alpha <= RENYI_TIGHT[1]:
        raise InvalidOrder(f"Renyi bound needs 0 <= alpha <= 2, got {alpha!r}")
    if _is_equal_means(spec):
        return BoundReport(0.0, True, None, True)
    bp = binary_pair_from_moments(spec)
    val = binary_renyi_accurate(bp.r, bp.r_c, bp.s, bp.s_c, alpha, bp.delta)
    return BoundReport(val, True, bp, False)


def chi2_bound_closed_form(spec: MomentSpec):
    """``a^2 / (2 sigma_q^2)``, the alpha = 2 bound (inf when sigma_q = 0)."""
    if _is_equal_means(spec):
        raise EqualMeans("closed form needs m_P != m_Q")
    a = spec.mean_p - spec.mean_q
    if spec.sigma_q == 0.0:
        return math.inf
    return a * a / (2.0 * spec.sigma_q ** 2)


def hellinger_bound_closed_form(spec: MomentSpec):
    """``4 (1 - sqrt(S^2 / (a^2 + S^2)))`` with ``S = sigma_p + sigma_q``.

    Evaluated as ``-4 expm1(-log1p(a^2/S^2) / 2)`` to keep small bounds
    accurate.
    """
    if _is_equal_means(spec):
        raise EqualMeans("closed form needs m_P != m_Q")
    a = spec.mean_p - spec.mean_q
    ssum = spec.sigma_p + spec.sigma_q
    if ssum == 0.0:
        return 4.0
    return -4.0 * math.expm1(-0.5 * math.log1p((a / ssum) ** 2))
