"""Brute-force certificates and explicit constructions around the bounds.

``min_search`` minimizes the alpha-divergence over pairs with prescribed
moments supported on 3 (or 4) points. Given the support, the moment
constraints fix the weights, so the search runs over support geometry only:
an exhaustive grid sweep followed by randomized local refinement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bounds import alpha_lower_bound, binary_pair_from_moments, renyi_lower_bound
from .divergences import _check_alpha, alpha_divergence, binary_alpha_accurate
from .errors import (
    DeltaInvalid,
    EqualMeans,
    JTooSmall,
    NoFeasiblePoint,
    ScanFailed,
    SingularSystem,
)
from .measures import MeasurePair, MomentSpec, make_measure, make_pair, moments


# ---------------------------------------------------------------------------
# moment-matching weights
# ---------------------------------------------------------------------------

def weights_for_support(support, mean, variance):
    """Weights on three distinct points with the given mean and variance.

    Returns the unique solution of the 3x3 moment system in the order of
    ``support``, or ``None`` when it has a weight below ``-1e-10``
    (infeasible). Slightly negative weights are clamped to zero.

    >>> weights_for_support([-1, 0, 1], 0.0, 1.0).tolist()
    [0.5, 0.0, 0.5]
    """
    u = np.asarray(support, dtype=np.float64).ravel()
    if u.shape != (3,):
        raise ValueError("weights_for_support needs exactly three points")
    if len(set(u.tolist())) < 3:
        raise SingularSystem("support points must be distinct")
    w, ok = K.solve_weights3(u[None, :], float(mean), float(variance))
    if not ok[0]:
        return None
    return w[0]


# ---------------------------------------------------------------------------
# search configuration and result
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    support_radius: float = 6.0
    grid_points_per_axis: int = 25
    support_size: int = 3
    random_restarts: int = 200
    seed: int = 0
    refine_iters: int = 80
    grid_seeds: int = 10
    extra_points: tuple = ()

    def validate(self, spec: MomentSpec):
        reach = max(abs(spec.mean_p) + 3 * spec.sigma_p,
                    abs(spec.mean_q) + 3 * spec.sigma_q)
        if not self.support_radius > reach:
            raise ValueError(
                f"support_radius {self.support_radius} must exceed {reach}")
        if self.grid_points_per_axis < 5:
            raise ValueError("grid_points_per_axis must be at least 5")
        if self.support_size not in (3, 4):
            raise ValueError("support_size must be 3 or 4")
        if self.random_restarts < 0 or self.refine_iters < 0:
            raise ValueError("random_restarts and refine_iters must be >= 0")

    def to_dict(self):
        return {"support_radius": self.support_radius,
                "grid_points_per_axis": self.grid_points_per_axis,
                "support_size": self.support_size,
                "random_restarts": self.random_restarts,
                "seed": self.seed, "refine_iters": self.refine_iters,
                "grid_seeds": self.grid_seeds,
                "extra_points": [float(x) for x in self.extra_points]}


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_value: float
    best_pair: MeasurePair
    bound_value: float
    gap: float
    evaluations: int
    feasible: int
    grid_size: int
    grid_feasible: int
    alpha: float = math.nan
    spec: MomentSpec | None = None
    extra: dict = field(default_factory=dict)

    @property
    def feasibility_ratio(self):
        return self.grid_feasible / self.grid_size if self.grid_size else 0.0

    def to_dict(self):
        out = {"alpha": self.alpha,
               "spec": None if self.spec is None else self.spec.to_dict(),
               "best_value": self.best_value, "bound_value": self.bound_value,
               "gap": self.gap, "evaluations": self.evaluations,
               "feasible": self.feasible,
               "feasibility_ratio": self.feasibility_ratio,
               "best_pair": self.best_pair.to_dict()}
        out.update(self.extra)
        return out

    def csv_row(self):
        s = self.spec
        return {"alpha": self.alpha, "mean_p": s.mean_p, "sigma_p": s.sigma_p,
                "mean_q": s.mean_q, "sigma_q": s.sigma_q,
                "best_value": self.best_value, "bound": self.bound_value,
                "gap": self.gap, "evaluations": self.evaluations,
                "feasibility_ratio": self.feasibility_ratio}


# ---------------------------------------------------------------------------
# candidate generation
# ---------------------------------------------------------------------------

def _grid_axis(cfg: SearchConfig):
    r = float(cfg.support_radius)
    base = np.linspace(-r, r, cfg.grid_points_per_axis)
    return np.unique(np.concatenate([base, np.asarray(cfg.extra_points, float)]))


def _grid_candidates(axis, k):
    combos = np.array(list(itertools.combinations(range(axis.size), k)))
    u = axis[combos]
    if k == 3:
        return u, None, None
    n = u.shape[0]
    omit = np.array(list(itertools.product(range(4), range(4))))
    u = np.repeat(u, omit.shape[0], axis=0)
    op = np.tile(omit[:, 0], n)
    oq = np.tile(omit[:, 1], n)
    return u, op, oq


def _sorted_rows(u, op, oq):
    order = np.argsort(u, axis=1, kind="stable")
    u = np.take_along_axis(u, order, axis=1)
    if op is None:
        return u, None, None
    inv = np.argsort(order, axis=1)
    rows = np.arange(u.shape[0])
    return u, inv[rows, op], inv[rows, oq]


def _argmin_lex(vals, u, op, oq):
    """Index of the smallest value; ties go to the lexicographically first support."""
    idx = np.flatnonzero(~np.isnan(vals))
    if idx.size == 0:
        return -1
    best = vals[idx].min()
    tied = idx[vals[idx] == best]
    if tied.size == 1:
        return int(tied[0])
    keys = [u[tied, c] for c in range(u.shape[1] - 1, -1, -1)]
    if op is not None:
        keys = [oq[tied], op[tied]] + keys
    return int(tied[np.lexsort(keys)[0]])


def _pair_for_row(u, op, oq, spec):
    rows = u[None, :]
    wp, _ = K._expand(rows, np.array([-1 if op is None else op]),
                      spec.mean_p, spec.sigma_p ** 2)
    wq, _ = K._expand(rows, np.array([-1 if oq is None else oq]),
                      spec.mean_q, spec.sigma_q ** 2)
    return make_pair(make_measure(u, wp[0]), make_measure(u, wq[0]))


def _evaluate(u, op, oq, spec, alpha):
    vals, ok = K.sweep(u, op, oq, spec.mean_p, spec.sigma_p ** 2,
                       spec.mean_q, spec.sigma_q ** 2, alpha)
    return np.where(ok, vals, np.nan), ok


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

def min_search(spec: MomentSpec, alpha, cfg: SearchConfig | None = None) -> SearchResult:
    """Empirical minimum of D_A^(alpha) over small-support pairs with ``spec``'s moments.

    Stage 1 sweeps every support of ``cfg.support_size`` grid points.
    Stage 2 refines ``cfg.random_restarts`` uniformly drawn supports, plus the
    ``cfg.grid_seeds`` best grid supports, by a shrinking-step stochastic
    local search (all candidates advance together as one batch). All
    randomness derives from ``cfg.seed``; the reduction is a deterministic
    min with lexicographic tie-breaking, so the result does not depend on
    the kernel backend or thread count.
    """
    cfg = SearchConfig() if cfg is None else cfg
    alpha = _check_alpha(alpha)
    if abs(spec.mean_p - spec.mean_q) <= 1e-12:
        raise EqualMeans("min_search needs m_P != m_Q; the bound is 0")
    cfg.validate(spec)
    k = cfg.support_size
    r = float(cfg.support_radius)
    rng = np.random.default_rng(cfg.seed)

    gu, gop, goq = _grid_candidates(_grid_axis(cfg), k)
    gvals, gok = _evaluate(gu, gop, goq, spec, alpha)
    grid_size, grid_feasible = gu.shape[0], int(gok.sum())
    evaluations, feasible = grid_size, grid_feasible

    # stage 2 population: random starts followed by the best grid rows
    pu = np.sort(rng.uniform(-r, r, size=(cfg.random_restarts, k)), axis=1)
    pop = poq = None
    if k == 4:
        pop = rng.integers(0, 4, cfg.random_restarts)
        poq = rng.integers(0, 4, cfg.random_restarts)
    ranked = np.argsort(np.where(np.isnan(gvals), np.inf, gvals), kind="stable")
    seeds = ranked[:min(cfg.grid_seeds, grid_feasible)]
    pu = np.concatenate([pu, gu[seeds]])
    if k == 4:
        pop = np.concatenate([pop, gop[seeds]])
        poq = np.concatenate([poq, goq[seeds]])
    vals, cur_ok = _evaluate(pu, pop, poq, spec, alpha)
    evaluations += pu.shape[0]
    feasible += int(cur_ok.sum())
    cur = np.where(np.isnan(vals), np.inf, vals)

    step = r / 4.0
    shrink = 1e-4 ** (1.0 / max(cfg.refine_iters, 1))
    for _ in range(cfg.refine_iters):
        prop = np.clip(pu + step * rng.standard_normal(pu.shape), -r, r)
        prop, qop, qoq = _sorted_rows(prop, pop, poq)
        vals, ok = _evaluate(prop, qop, qoq, spec, alpha)
        evaluations += prop.shape[0]
        feasible += int(ok.sum())
        vals = np.where(np.isnan(vals), np.inf, vals)
        better = ok & ((vals < cur) | ~cur_ok)
        pu = np.where(better[:, None], prop, pu)
        if k == 4:
            pop = np.where(better, qop, pop)
            poq = np.where(better, qoq, poq)
        cur = np.where(better, vals, cur)
        cur_ok |= better
        step *= shrink

    all_u = np.concatenate([gu, pu])
    all_vals = np.concatenate([gvals, np.where(cur_ok, cur, np.nan)])
    all_op = all_oq = None
    if k == 4:
        all_op = np.concatenate([gop, pop])
        all_oq = np.concatenate([goq, poq])
    best = _argmin_lex(all_vals, all_u, all_op, all_oq)
    if best < 0:
        raise NoFeasiblePoint(
            "no feasible support found; enlarge the radius or refine the grid")
    best_value = float(all_vals[best])
    pair = _pair_for_row(all_u[best], None if k == 3 else int(all_op[best]),
                         None if k == 3 else int(all_oq[best]), spec)
    bound = alpha_lower_bound(spec, alpha).bound
    return SearchResult(best_value=best_value, best_pair=pair, bound_value=bound,
                        gap=best_value - bound, evaluations=evaluations,
                        feasible=feasible, grid_size=grid_size,
                        grid_feasible=grid_feasible, alpha=alpha, spec=spec)


def renyi_zero_search(spec: MomentSpec, samples=20000, seed=0, radius=None) -> SearchResult:
    """Minimum of D_R^(0)(delta_{m_P} || Q) over random 3-point Q with ``spec``'s Q-moments.

    Requires ``sigma_p = 0``. Each candidate Q puts one point at ``m_P`` and
    two uniform points; D_R^(0) is then ``-log Q(m_P)``. Supports without
    ``m_P`` give ``inf`` and are not sampled.
    """
    if spec.sigma_p != 0.0:
        raise ValueError("renyi_zero_search needs sigma_p = 0")
    if abs(spec.mean_p - spec.mean_q) <= 1e-12:
        raise EqualMeans("needs m_P != m_Q")
    m, vq = spec.mean_p, spec.sigma_q ** 2
    if radius is None:
        radius = max(abs(spec.mean_p), abs(spec.mean_q) + 3 * spec.sigma_q) + 1.0
    rng = np.random.default_rng(seed)
    uv = rng.uniform(-radius, radius, size=(samples, 2))
    u = np.column_stack([np.full(samples, m), uv])
    w, ok = K.solve_weights3(u, spec.mean_q, vq)
    distinct = (uv[:, 0] != uv[:, 1]) & (uv[:, 0] != m) & (uv[:, 1] != m)
    ok &= distinct & (w[:, 0] > 0)
    if not ok.any():
        raise NoFeasiblePoint("no feasible Q found")
    vals = np.where(ok, -np.log(np.where(ok, w[:, 0], 1.0)), np.nan)
    best = _argmin_lex(vals, np.sort(u, axis=1), None, None)
    pair = make_pair(make_measure([m], [1.0]), make_measure(u[best], w[best]))
    bound = renyi_lower_bound(spec, 0.0).bound
    best_value = float(vals[best])
    return SearchResult(best_value=best_value, best_pair=pair, bound_value=bound,
                        gap=best_value - bound, evaluations=samples,
                        feasible=int(ok.sum()), grid_size=samples,
                        grid_feasible=int(ok.sum()), alpha=0.0, spec=spec,
                        extra={"kind": "renyi"})


# ---------------------------------------------------------------------------
# alpha < -1 counterexample
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CounterexampleReport:
    alpha: float
    delta: float
    u3: float
    sigma_q: float
    divergence: float
    bound: float
    gap: float
    limit_divergence: float
    tail_term: float
    actual_moments: MomentSpec
    bound_at_actual: float
    gap_at_actual: float
    scan: tuple = ()

    def to_dict(self):
        return {"alpha": self.alpha, "delta": self.delta, "u3": self.u3,
                "sigma_q": self.sigma_q, "divergence": self.divergence,
                "bound": self.bound, "gap": self.gap,
                "limit_divergence": self.limit_divergence,
                "tail_term": self.tail_term,
                "actual_moments": self.actual_moments.to_dict(),
                "bound_at_actual": self.bound_at_actual,
                "gap_at_actual": self.gap_at_actual,
                "scan": [{"sigma_q": s, "gap": g} for s, g in self.scan]}


def _x_of_vq(vp, vq, a):
    w = math.sqrt((vq - vp) ** 2 + 2 * a * a * (vp + vq) + a ** 4)
    return w / (vp + vq + a * a)


def sigma_star(sigma_p, gap, alpha):
    """Largest sigma_Q with ``1 + alpha x(z) < 0`` on all of ``[0, sigma_Q^2]``.

    ``x(V_Q) = 2va / (V_P + V_Q + a^2)`` (taken for ``a > 0``) starts at 1,
    dips to its minimum ``|a| / sqrt(V_P + a^2)`` at ``V_Q = V_P + a^2`` and
    climbs back toward 1. If even the minimum exceeds ``-1/alpha``, the
    sigma at the minimizer is returned.
    """
    vp, a = sigma_p ** 2, abs(gap)
    thresh = -1.0 / alpha
    v_min = vp + a * a
    if _x_of_vq(vp, v_min, a) > thresh:
        return math.sqrt(v_min)
    lo, hi = 0.0, v_min
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _x_of_vq(vp, mid, a) > thresh:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo)


def _counterexample_pair(m_p, sigma_p, m_q, sigma_q, delta, u3):
    primed = binary_pair_from_moments(MomentSpec(m_p, sigma_p, m_q, 0.0))
    # u1' is the point carrying all of S'
    if primed.s_c == 0.0:
        u1, u2, r1 = primed.u1, primed.u2, primed.r
    else:
        u1, u2, r1 = primed.u2, primed.u1, primed.r_c
    if not u3 > max(abs(u1), abs(u2)):
        raise ValueError(f"u3={u3!r} must exceed max(|u1'|, |u2'|)")
    eps_p = u3 ** -(2.0 + delta)
    eps_q = sigma_q ** 2 / u3 ** 2
    if eps_p > r1 or eps_q > 1.0:
        raise ValueError("u3 too small for the construction")
    pts = [u1, u2, u3]
    p = make_measure(pts, [r1 - eps_p, 1.0 - r1, eps_p])
    q = make_measure(pts, [1.0 - eps_q, 0.0, eps_q])
    return make_pair(p, q), r1, eps_p, eps_q


def counterexample_alpha_lt_minus1(m_p, sigma_p, m_q, alpha, delta=0.4, u3=1e3,
                                   sigma_q=None, scan_steps=40):
    """Three-point pair whose divergence falls below the binary value, ``alpha < -1``.

    With ``sigma_q=None`` the scan walks ``sigma_q = s* 2^-k`` downward from
    :func:`sigma_star` and keeps the first value with a positive gap
    (binary value at the spec minus the pair's divergence). Returns
    ``(pair, CounterexampleReport)``. The construction matches the spec
    only as ``u3 -> inf``, so the report also carries the bound recomputed
    at the pair's exact moments.
    """
    alpha = _check_alpha(alpha)
    if not alpha < -1.0:
        raise ValueError("the counterexample needs alpha < -1")
    delta = float(delta)
    if not delta > 0.0 or not 2.0 + alpha * delta > 0.0:
        raise DeltaInvalid(f"need delta > 0 and 2 + alpha*delta > 0, got delta={delta!r}")
    u3 = float(u3)

    def evaluate(sq):
        pair, r1, eps_p, eps_q = _counterexample_pair(m_p, sigma_p, m_q, sq, delta, u3)
        div = alpha_divergence(pair, alpha)
        bound = alpha_lower_bound(MomentSpec(m_p, sigma_p, m_q, sq), alpha).bound
        return pair, r1, eps_p, eps_q, div, bound

    scan = []
    if sigma_q is None:
        s0 = sigma_star(sigma_p, m_p - m_q, alpha)
        chosen = None
        for kk in range(scan_steps):
            sq = s0 * 2.0 ** -kk
            try:
                res = evaluate(sq)
            except ValueError:
                continue
            g = res[5] - res[4]
            scan.append((sq, g))
            if g > 0:
                chosen = (sq, res)
                break
        if chosen is None:
            raise ScanFailed("no scanned sigma_Q gives a positive gap; increase u3")
        sigma_q, res = chosen
    else:
        sigma_q = float(sigma_q)
        res = evaluate(sigma_q)
    pair, r1, eps_p, eps_q, div, bound = res
    limit = binary_alpha_accurate(r1, 1.0 - r1, 1.0, 0.0, alpha)
    tail = eps_p ** alpha * eps_q ** (1.0 - alpha) / (alpha * (alpha - 1.0))
    mp_, vp_ = moments(pair.p)
    mq_, vq_ = moments(pair.q)
    actual = MomentSpec(mp_, math.sqrt(vp_), mq_, math.sqrt(vq_))
    bound_actual = alpha_lower_bound(actual, alpha).bound
    report = CounterexampleReport(
        alpha=alpha, delta=delta, u3=u3, sigma_q=sigma_q, divergence=div,
        bound=bound, gap=bound - div, limit_divergence=limit, tail_term=tail,
        actual_moments=actual, bound_at_actual=bound_actual,
        gap_at_actual=bound_actual - div, scan=tuple(scan))
    return pair, report


# ---------------------------------------------------------------------------
# equal-means vanishing sequence
# ---------------------------------------------------------------------------

def equal_means_xi(sigma_p, sigma_q):
    """Return ``(xi, scale)`` used by :func:`equal_means_sequence`."""
    sp, sq = float(sigma_p), float(sigma_q)
    scale = 1.0
    if min(sp, sq) <= 1.0:
        scale = min(sp, sq) / math.sqrt(2.0)
        sp, sq = sp / scale, sq / scale
    return (sp * sp - 1.0) / (sq * sq - 1.0), scale


def equal_means_sequence(sigma_p, sigma_q, j) -> MeasurePair:
    """Zero-mean four-point pair (P_j, Q_j) with variances sigma_p^2, sigma_q^2.

    Q_j puts ``1/2 - 1/(2j)`` on ``+-1`` and ``1/(2j)`` on ``+-mu_j`` with
    ``mu_j = sqrt(1 + j (sigma_q^2 - 1))``; P_j uses ``xi`` in place of 1 in
    the small masses, ``xi = (sigma_p^2 - 1)/(sigma_q^2 - 1)``. When either
    sigma is at most 1 the construction runs on the scaled pair (both
    sigmas divided by ``min(sigma)/sqrt(2)``) and the points are scaled
    back. D_A(P_j || Q_j) then equals the binary divergence of ``xi/j``
    against ``1/j``, which tends to 0.
    """
    sp, sq = float(sigma_p), float(sigma_q)
    if not (sp > 0 and sq > 0 and math.isfinite(sp) and math.isfinite(sq)):
        raise ValueError("sigmas must be positive and finite")
    j = int(j)
    if j < 1:
        raise JTooSmall("j must be at least 1")
    if sp == sq:
        m = make_measure([-sp, sp], [0.5, 0.5])
        return make_pair(m, m)
    xi, scale = equal_means_xi(sp, sq)
    sq_s = sq / scale
    if xi / j > 1.0:
        raise JTooSmall(f"j={j} is below xi={xi!r}; weights leave [0, 1]")
    mu = math.sqrt(1.0 + j * (sq_s * sq_s - 1.0))
    pts = scale * np.array([-mu, -1.0, 1.0, mu])
    big_p, small_p = 0.5 - xi / (2 * j), xi / (2 * j)
    big_q, small_q = 0.5 - 1.0 / (2 * j), 1.0 / (2 * j)
    p = make_measure(pts, [small_p, big_p, big_p, small_p])
    q = make_measure(pts, [small_q, big_q, big_q, small_q])
    return make_pair(p, q)


# ---------------------------------------------------------------------------
# auxiliary inequality behind the monotonicity of the bound
# ---------------------------------------------------------------------------

def sign_function_F(alpha, x):
    """``log[(1 - a x)(1 + x)^a / ((1 + a x)(1 - x)^a)] = 2 (a atanh x - atanh(a x))``.

    Vectorized; ``+-inf`` at ``x = +-1``.
    """
    a = np.asarray(alpha, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return 2.0 * (a * np.arctanh(x) - np.arctanh(a * x))


@dataclass(frozen=True)
class SignScanReport:
    violations: int
    checked: int
    worst_margin: float
    worst_alpha: float
    worst_x: float

    def to_dict(self):
        return {"violations": self.violations, "checked": self.checked,
                "worst_margin": self.worst_margin,
                "worst_alpha": self.worst_alpha, "worst_x": self.worst_x}


def lemma5_scan(alpha_grid, x_grid) -> SignScanReport:
    """Count grid points where ``sign(F(x)) != sign(x)`` for ``0 < alpha < 1``.

    ``worst_margin`` is the minimum of ``sign(x) F(x)``; it is positive
    exactly when there are no violations.
    """
    a = np.asarray(alpha_grid, dtype=np.float64).ravel()
    x = np.asarray(x_grid, dtype=np.float64).ravel()
    if np.any((a <= 0) | (a >= 1)):
        raise ValueError("alpha grid must lie in (0, 1)")
    if np.any((x == 0) | (np.abs(x) > 1)):
        raise ValueError("x grid must lie in [-1, 1] without 0")
    A, X = np.meshgrid(a, x, indexing="ij")
    margin = np.sign(X) * sign_function_F(A, X)
    violations = int(np.sum(~(margin > 0)))
    i = np.unravel_index(np.argmin(margin), margin.shape)
    return SignScanReport(violations, int(margin.size), float(margin[i]),
                        float(A[i]), float(X[i]))
