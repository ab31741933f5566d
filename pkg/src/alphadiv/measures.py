"""Finite discrete probability measures on the real line."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LengthMismatch,
    NegativeWeight,
    NonFinitePoint,
    TOutOfRange,
    WeightSumInvalid,
)

NEG_WEIGHT_TOL = 1e-12
SUM_TOL = 1e-9
VAR_CLAMP = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weights on strictly increasing support points.

    Build through :func:`make_measure`; the constructor does not validate.
    Zero weights are kept so two measures can share one support.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def __repr__(self):
        return (f"DiscreteMeasure(points={self.points.tolist()}, "
                f"weights={self.weights.tolist()})")

    def to_dict(self):
        return {"points": [float(x) for x in self.points],
                "weights": [float(w) for w in self.weights]}

    def to_json(self):
        from .serialize import dumps
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj) -> DiscreteMeasure:
        return make_measure(obj["points"], obj["weights"])

    @classmethod
    def from_json(cls, text) -> DiscreteMeasure:
        return cls.from_dict(json.loads(text))


def make_measure(points, weights) -> DiscreteMeasure:
    """Validate and canonicalize a finite measure.

    Points are sorted and duplicates merged by summing their weights.
    Weights down to ``-1e-12`` are clamped to zero, and a total within
    ``1e-9`` of one is renormalized to one.

    >>> make_measure([1, 0], [0.3, 0.7])
    DiscreteMeasure(points=[0.0, 1.0], weights=[0.7, 0.3])
    """
    u = np.asarray(points, dtype=np.float64).ravel()
    w = np.asarray(weights, dtype=np.float64).ravel()
    if u.shape != w.shape:
        raise LengthMismatch(f"{u.size} points but {w.size} weights")
    if u.size == 0:
        raise LengthMismatch("a measure needs at least one support point")
    if not np.all(np.isfinite(u)):
        raise NonFinitePoint("support points must be finite")
    if not np.all(np.isfinite(w)):
        raise WeightSumInvalid("weights must be finite")
    if np.any(w < -NEG_WEIGHT_TOL):
        raise NegativeWeight(f"weight {w.min()!r} is below -{NEG_WEIGHT_TOL}")
    w = np.maximum(w, 0.0)
    total = math.fsum(w)
    if abs(total - 1.0) > SUM_TOL:
        raise WeightSumInvalid(f"weights sum to {total!r}")
    uniq, inv = np.unique(u, return_inverse=True)
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inv.ravel(), w)
    total = math.fsum(merged)
    # skip sums already within rounding of one so canonicalization is idempotent
    if abs(total - 1.0) > merged.size * 2.0 ** -52:
        merged = merged / total
    return DiscreteMeasure(uniq, merged)


def point_mass(x) -> DiscreteMeasure:
    return make_measure([x], [1.0])


def moments(m: DiscreteMeasure):
    """Return ``(mean, variance)``.

    The variance is accumulated about the mean, which equals
    ``sum w u**2 - mean**2`` without its cancellation; values in
    ``[-1e-12, 0)`` are clamped to zero.
    """
    mean = math.fsum(m.weights * m.points)
    var = math.fsum(m.weights * (m.points - mean) ** 2)
    if -VAR_CLAMP <= var < 0.0:
        var = 0.0
    return mean, var


@dataclass(frozen=True)
class MomentSpec:
    """Prescribed means and standard deviations of P and Q."""

    mean_p: float
    sigma_p: float
    mean_q: float
    sigma_q: float

    def __post_init__(self):
        for name in ("mean_p", "sigma_p", "mean_q", "sigma_q"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.mean_p, self.sigma_p, self.mean_q, self.sigma_q)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("moment specification must be finite")
        if self.sigma_p < 0 or self.sigma_q < 0:
            raise ValueError("standard deviations must be nonnegative")

    @property
    def gap(self):
        return self.mean_p - self.mean_q

    def swapped(self) -> MomentSpec:
        return MomentSpec(self.mean_q, self.sigma_q, self.mean_p, self.sigma_p)

    def to_dict(self):
        return {"mean_p": self.mean_p, "sigma_p": self.sigma_p,
                "mean_q": self.mean_q, "sigma_q": self.sigma_q}


@dataclass(frozen=True, eq=False)
class MeasurePair:
    """Two measures on one shared (union) support."""

    p: DiscreteMeasure
    q: DiscreteMeasure

    @property
    def points(self):
        return self.p.points

    @property
    def diff(self):
        """``q - p`` weight differences on the shared support."""
        return self.q.weights - self.p.weights

    def swapped(self) -> MeasurePair:
        return MeasurePair(self.q, self.p)

    def __eq__(self, other):
        if not isinstance(other, MeasurePair):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    __hash__ = None

    def to_dict(self):
        return {"p": self.p.to_dict(), "q": self.q.to_dict()}

    @classmethod
    def from_dict(cls, obj) -> MeasurePair:
        return make_pair(DiscreteMeasure.from_dict(obj["p"]),
                         DiscreteMeasure.from_dict(obj["q"]))


def _on_support(m, support):
    w = np.zeros(support.shape[0])
    w[np.searchsorted(support, m.points)] = m.weights
    return DiscreteMeasure(support.copy(), w)


def make_pair(p: DiscreteMeasure, q: DiscreteMeasure) -> MeasurePair:
    """Put ``p`` and ``q`` on the union of their supports."""
    if np.array_equal(p.points, q.points):
        return MeasurePair(p, q)
    support = np.union1d(p.points, q.points)
    return MeasurePair(_on_support(p, support), _on_support(q, support))


def pair_from_weights(points, p_weights, q_weights) -> MeasurePair:
    return make_pair(make_measure(points, p_weights),
                     make_measure(points, q_weights))


def mixture(pair: MeasurePair, t) -> DiscreteMeasure:
    """The point ``(Q - P) t + P`` of the segment from P to Q."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise TOutOfRange(f"t={t!r} is outside [0, 1]")
    if t == 0.0:
        return pair.p
    if t == 1.0:
        return pair.q
    w = np.maximum(pair.p.weights + t * pair.diff, 0.0)
    return DiscreteMeasure(pair.points.copy(), w / math.fsum(w))
