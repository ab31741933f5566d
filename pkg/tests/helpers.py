"""Independent oracles and random generators shared by the test modules.

The oracles work in mpmath at 50 digits straight from the defining sums and
share no code with the library.
"""

import math

import mpmath as mp
import numpy as np

from alphadiv import MomentSpec, make_measure, make_pair

mp.mp.dps = 50

# PASS/FAIL lines from the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []

STANDARD_P = ([0.0, 1.0], [0.7, 0.3])
STANDARD_Q = ([0.0, 1.0], [0.5, 0.5])


def standard_pair():
    return make_pair(make_measure(*STANDARD_P), make_measure(*STANDARD_Q))


def mp_alpha(p, q, alpha):
    """Alpha-divergence by direct summation in extended precision."""
    p = [mp.mpf(float(x)) for x in p]
    q = [mp.mpf(float(x)) for x in q]
    sp, sq = mp.fsum(p), mp.fsum(q)
    p = [x / sp for x in p]
    q = [x / sq for x in q]
    a = mp.mpf(alpha)
    if a == 1:
        acc = mp.mpf(0)
        for x, y in zip(p, q):
            if x == 0:
                continue
            if y == 0:
                return math.inf
            acc += x * mp.log(x / y)
        return float(acc)
    if a == 0:
        return mp_alpha(q, p, 1.0)
    acc = mp.mpf(0)
    for x, y in zip(p, q):
        if x == 0 and y == 0:
            continue
        if x == 0:
            if a > 0:
                continue
            return math.inf
        if y == 0:
            if a < 1:
                continue
            return math.inf
        acc += x ** a * y ** (1 - a)
    return float((acc - 1) / (a * (a - 1)))


def mp_binary(r, s, alpha):
    return mp_alpha([r, 1 - mp.mpf(r)], [s, 1 - mp.mpf(s)], alpha)


def rel_err(x, y):
    if x == y:
        return 0.0
    return abs(x - y) / max(abs(x), abs(y))


def close(x, y, tol):
    """Mixed test: relative above magnitude 1, absolute below."""
    if math.isinf(x) or math.isinf(y):
        return x == y
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def random_specs(n, seed=0):
    """Specs with means in [-5, 5], sigmas in [0.01, 5] and |a| > 1e-3."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        mp_, mq = rng.uniform(-5, 5, 2)
        if abs(mp_ - mq) <= 1e-3:
            continue
        sp, sq = rng.uniform(0.01, 5, 2)
        out.append(MomentSpec(mp_, sp, mq, sq))
    return out


def random_full_pairs(n, k=3, seed=0):
    """Pairs on ``0..k-1`` with Dirichlet(1, ..., 1) weights on both sides."""
    rng = np.random.default_rng(seed)
    pts = np.arange(k, dtype=float)
    out = []
    for _ in range(n):
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        out.append(make_pair(make_measure(pts, p), make_measure(pts, q)))
    return out


def random_sparse_pairs(n, k=4, seed=0, zero_prob=0.2):
    """Like :func:`random_full_pairs` but weights are zeroed at random."""
    rng = np.random.default_rng(seed)
    pts = np.arange(k, dtype=float)
    out = []
    for _ in range(n):
        ws = []
        for _side in range(2):
            w = rng.dirichlet(np.ones(k))
            mask = rng.random(k) < zero_prob
            if mask.all():
                mask[rng.integers(k)] = False
            w[mask] = 0.0
            ws.append(w / w.sum())
        out.append(make_pair(make_measure(pts, ws[0]), make_measure(pts, ws[1])))
    return out
