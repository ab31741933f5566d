"""Numeric kernels: accurate alpha-divergence sums and the brute-force sweep.

Two interchangeable backends live here. The numpy backend is always
available; the numba backend compiles the same arithmetic with ``@njit``,
both for single divergences and for the batch sweep (3x3 moment solves
plus divergence evaluation over many candidate supports). Select with the environment
variable ``ALPHADIV_NUMBA`` (``0`` forces numpy) or at runtime with
:func:`set_backend`.

Divergences are evaluated from ``(p, q, d)`` with ``d = q - p`` supplied by
the caller, so path evaluations ``q_t = p + t*d`` keep full relative
precision even when ``t`` is tiny. The power sum is rewritten as

    sum(p**a * q**(1-a)) - sum(p) = sum p*expm1(b*L),   L = log1p(d/p), b = 1-a

and split into second-order pieces ``expm1(y) - y`` and ``log1p(x) - x``,
which removes the cancellation of the naive ``(S - 1) / (a*(a-1))``.
Both weight vectors are taken to be normalized: first-order terms such as
``sum d`` are replaced by their exact values rather than summed.
"""

import math
import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    NUMBA_AVAILABLE = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip the TBB probe, which warns on older system TBB builds
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False
    prange = range

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


# |alpha - branch| below this dispatches to the exact KL limit
BRANCH_TOL = 1e-12
# 3-point weights below -FEAS_TOL mark a support as infeasible
FEAS_TOL = 1e-10

_BACKEND = "numpy"


def _initial_backend():
    flag = os.environ.get("ALPHADIV_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return "numpy"
    return "numba" if NUMBA_AVAILABLE else "numpy"


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` for batch kernels; returns the old one."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        warnings.warn("numba is not installed; staying on the numpy backend")
        name = "numpy"
    old, _BACKEND = _BACKEND, name
    return old


def get_backend():
    return _BACKEND


def configure_threads():
    """Apply ``ALPHADIV_THREADS`` (0 or unset = numba default) and return the count."""
    if not NUMBA_AVAILABLE:
        return 1
    raw = os.environ.get("ALPHADIV_THREADS", "0").strip() or "0"
    n = int(raw)
    if n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return numba.get_num_threads()


_BACKEND = _initial_backend()


# ---------------------------------------------------------------------------
# second-order helpers (numpy)
# ---------------------------------------------------------------------------

_EM_COEF = np.array([1.0 / math.factorial(k) for k in range(2, 22)])
_LM_NTERMS = 17


def expm1_minus_x(y):
    """``expm1(y) - y`` without cancellation near zero."""
    y = np.asarray(y, dtype=np.float64)
    small = np.abs(y) < 0.5
    ys = np.where(small, y, 0.0)
    acc = np.zeros_like(ys)
    for c in _EM_COEF[::-1]:
        acc = acc * ys + c
    series = acc * ys * ys
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.expm1(y) - y
    return np.where(small, series, direct)


def log_ratio(p, q, x):
    """``log(q/p)`` given ``x = (q - p)/p``; avoids log1p's blow-up near x = -1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x < -0.5, np.log(q / p), np.log1p(x))


def log1p_minus_x(x, L=None):
    """``log1p(x) - x`` for ``x > -1`` without cancellation near zero.

    ``L`` optionally supplies an accurate ``log1p(x)`` for the large-|x| branch.
    """
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 0.5
    xs = np.where(small, x, 0.0)
    z = xs / (2.0 + xs)
    z2 = z * z
    acc = np.zeros_like(z)
    for k in range(_LM_NTERMS, 0, -1):
        acc = acc * z2 + 1.0 / (2 * k + 1)
    series = -xs * xs / (2.0 + xs) + 2.0 * z * z2 * acc
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.log1p(x) if L is None else L) - x
    return np.where(small, series, direct)


# ---------------------------------------------------------------------------
# divergence sums (numpy, row-wise over the last axis)
# ---------------------------------------------------------------------------

def _kl_rows(p, q, d):
    """sum p*log(p/q) along the last axis; ``d = q - p``."""
    pos = (p > 0) & (q > 0)
    bad = ((q == 0) & (p > 0)).any(axis=-1)
    ps = np.where(pos, p, 1.0)
    x = np.where(pos, d / ps, 0.0)
    L = log_ratio(ps, np.where(pos, q, 1.0), x)
    # sum over pos of d is -Q(p == 0) for normalized weights
    val = (np.where((p == 0) & (q > 0), q, 0.0).sum(axis=-1)
           - np.where(pos, p * log1p_minus_x(x, L), 0.0).sum(axis=-1))
    return np.where(bad, np.inf, val)


def power_excess_rows(p, q, d, alpha):
    """``sum p**a q**(1-a) - 1`` along the last axis (may be +inf).

    The expansion is about ``alpha = 1``; below 1/2 the roles of p and q
    are swapped (``alpha -> 1 - alpha``) so the result keeps its relative
    accuracy as ``alpha -> 0``.
    """
    if alpha < 0.5:
        return _power_excess(q, p, -d, 1.0 - alpha, alpha)
    return _power_excess(p, q, d, alpha, 1.0 - alpha)


def _power_excess(p, q, d, alpha, beta):
    # beta = 1 - alpha comes from the caller: after the swap 1 - (1 - a) != a
    pos = (p > 0) & (q > 0)
    ps = np.where(pos, p, 1.0)
    x = np.where(pos, d / ps, 0.0)
    L = log_ratio(ps, np.where(pos, q, 1.0), x)
    with np.errstate(over="ignore", invalid="ignore"):
        t_em = np.where(pos, p * expm1_minus_x(beta * L), 0.0).sum(axis=-1)
    t_lm = np.where(pos, p * log1p_minus_x(x, L), 0.0).sum(axis=-1)
    only_q = (p == 0) & (q > 0)
    only_p = (q == 0) & (p > 0)
    # sum over pos of d, taken exactly from the normalization of p and q;
    # summing d itself leaves an O(eps) floor that swamps O(t^2) path values
    t_d = (np.where(only_p, p, 0.0).sum(axis=-1)
           - np.where(only_q, q, 0.0).sum(axis=-1))
    with np.errstate(over="ignore", invalid="ignore"):
        total = t_em + beta * (t_lm + t_d)
    if alpha < 1:
        total = total - np.where(only_p, p, 0.0).sum(axis=-1)
    else:
        total = np.where(only_p.any(axis=-1), np.inf, total)
    return total


def alpha_div_rows(p, q, d, alpha):
    """Raw alpha-divergence along the last axis (no sign clamping)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if abs(alpha - 1.0) <= BRANCH_TOL:
        return _kl_rows(p, q, d)
    if abs(alpha) <= BRANCH_TOL:
        return _kl_rows(q, p, -d)
    total = power_excess_rows(p, q, d, alpha)
    return total / (alpha * (alpha - 1.0))


# ---------------------------------------------------------------------------
# 3-point moment solve (numpy)
# ---------------------------------------------------------------------------

def solve_weights3(u, mean, var):
    """Weights on the rows of ``u`` (shape (N, 3)) matching mean and variance.

    Lagrange form of the 3x3 Vandermonde inverse:
    ``w_i = (var + (m - u_j)(m - u_k)) / ((u_i - u_j)(u_i - u_k))``.
    Returns ``(w, feasible)``; infeasible rows keep their raw weights.
    """
    u = np.asarray(u, dtype=np.float64)
    w = np.empty_like(u)
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        num = var + (mean - u[:, j]) * (mean - u[:, k])
        den = (u[:, i] - u[:, j]) * (u[:, i] - u[:, k])
        with np.errstate(divide="ignore", invalid="ignore"):
            w[:, i] = num / den
    # coincident points make the system singular: mark those rows infeasible
    feasible = (np.isfinite(w) & (w >= -FEAS_TOL)).all(axis=1)
    w = np.where(feasible[:, None], np.maximum(w, 0.0), w)
    return w, feasible


_KEEP4 = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])


def _expand(u, omit, mean, var):
    n, k = u.shape
    if k == 3:
        w, ok = solve_weights3(u, mean, var)
        return w, ok
    keep = _KEEP4[omit]
    sub = np.take_along_axis(u, keep, axis=1)
    w3, ok = solve_weights3(sub, mean, var)
    w = np.zeros_like(u)
    np.put_along_axis(w, keep, w3, axis=1)
    return w, ok


def alpha_div_one(p, q, d, alpha):
    """Raw alpha-divergence of one pair of 1-D weight arrays on the active backend."""
    if _BACKEND == "numba":
        return float(_alpha_div_row(p, q, d, float(alpha)))
    return float(alpha_div_rows(p[None, :], q[None, :], d[None, :], alpha)[0])


def _sweep_numpy(u, omit_p, omit_q, mp, vp, mq, vq, alpha):
    wp, okp = _expand(u, omit_p, mp, vp)
    wq, okq = _expand(u, omit_q, mq, vq)
    ok = okp & okq
    vals = np.full(u.shape[0], np.nan)
    if ok.any():
        p, q = wp[ok], wq[ok]
        vals[ok] = alpha_div_rows(p, q, q - p, alpha)
    return vals, ok


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _em_s(y):
    if abs(y) < 0.5:
        acc = 0.0
        for c in range(_EM_COEF.shape[0] - 1, -1, -1):
            acc = acc * y + _EM_COEF[c]
        return acc * y * y
    return math.expm1(y) - y


@njit(cache=True, error_model="numpy")
def _log_ratio_s(p, q, x):
    if x < -0.5:
        return math.log(q / p)
    return math.log1p(x)


@njit(cache=True, error_model="numpy")
def _lm_s(x, L):
    if abs(x) < 0.5:
        z = x / (2.0 + x)
        z2 = z * z
        acc = 0.0
        for k in range(17, 0, -1):
            acc = acc * z2 + 1.0 / (2 * k + 1)
        return -x * x / (2.0 + x) + 2.0 * z * z2 * acc
    return L - x


@njit(cache=True, error_model="numpy")
def _kl_row(p, q, d):
    acc_lm = 0.0
    acc_q = 0.0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            if q[i] == 0.0:
                return np.inf
            x = d[i] / p[i]
            acc_lm += p[i] * _lm_s(x, _log_ratio_s(p[i], q[i], x))
        else:
            acc_q += q[i]
    return acc_q - acc_lm


@njit(cache=True, error_model="numpy")
def _alpha_div_row(p, q, d, alpha):
    if abs(alpha - 1.0) <= BRANCH_TOL:
        return _kl_row(p, q, d)
    if abs(alpha) <= BRANCH_TOL:
        return _kl_row(q, p, -d)
    if alpha < 0.5:
        return _alpha_div_core(q, p, d, -1.0, 1.0 - alpha, alpha)
    return _alpha_div_core(p, q, d, 1.0, alpha, 1.0 - alpha)


@njit(cache=True, error_model="numpy")
def _alpha_div_core(p, q, d, sgn, alpha, beta):
    # alpha >= 1/2 here; sgn * d[i] is q[i] - p[i] and beta = 1 - alpha
    t_em = 0.0
    t_lm = 0.0
    t_d = 0.0
    t_zero = 0.0
    for i in range(p.shape[0]):
        pi = p[i]
        qi = q[i]
        if pi > 0.0 and qi > 0.0:
            x = sgn * d[i] / pi
            L = _log_ratio_s(pi, qi, x)
            t_em += pi * _em_s(beta * L)
            t_lm += pi * _lm_s(x, L)
        elif pi == 0.0 and qi > 0.0:
            t_d -= qi
        elif qi == 0.0 and pi > 0.0:
            if alpha > 1.0:
                return np.inf
            t_d += pi
            t_zero += pi
    total = t_em + beta * (t_lm + t_d) - t_zero
    return total / (-alpha * beta)


@njit(cache=True, error_model="numpy")
def _solve3_into(u0, u1, u2, mean, var, out, i0, i1, i2):
    us = (u0, u1, u2)
    idx = (i0, i1, i2)
    ok = True
    for a in range(3):
        ui = us[a]
        uj = us[(a + 1) % 3]
        uk = us[(a + 2) % 3]
        den = (ui - uj) * (ui - uk)
        if den == 0.0:
            ok = False
            out[idx[a]] = 0.0
            continue
        w = (var + (mean - uj) * (mean - uk)) / den
        if w < -FEAS_TOL:
            ok = False
        out[idx[a]] = w if w > 0.0 else 0.0
    return ok


@njit(parallel=True, cache=True, error_model="numpy")
def _sweep_numba(u, omit_p, omit_q, mp, vp, mq, vq, alpha):
    n, k = u.shape
    vals = np.full(n, np.nan)
    feas = np.zeros(n, dtype=np.bool_)
    for r in prange(n):
        p = np.zeros(k)
        q = np.zeros(k)
        if k == 3:
            okp = _solve3_into(u[r, 0], u[r, 1], u[r, 2], mp, vp, p, 0, 1, 2)
            okq = _solve3_into(u[r, 0], u[r, 1], u[r, 2], mq, vq, q, 0, 1, 2)
        else:
            kp = np.empty(3, dtype=np.int64)
            kq = np.empty(3, dtype=np.int64)
            c = 0
            for j in range(4):
                if j != omit_p[r]:
                    kp[c] = j
                    c += 1
            c = 0
            for j in range(4):
                if j != omit_q[r]:
                    kq[c] = j
                    c += 1
            okp = _solve3_into(u[r, kp[0]], u[r, kp[1]], u[r, kp[2]],
                               mp, vp, p, kp[0], kp[1], kp[2])
            okq = _solve3_into(u[r, kq[0]], u[r, kq[1]], u[r, kq[2]],
                               mq, vq, q, kq[0], kq[1], kq[2])
        if okp and okq:
            feas[r] = True
            vals[r] = _alpha_div_row(p, q, q - p, alpha)
    return vals, feas


def sweep(u, omit_p, omit_q, mp, vp, mq, vq, alpha, backend=None):
    """Evaluate D_A(P||Q) for every candidate support row.

    ``u`` has shape (N, 3) or (N, 4). For 4-point rows, ``omit_p[i]`` and
    ``omit_q[i]`` name the support index each measure leaves at zero.
    Returns ``(values, feasible)``; infeasible rows carry NaN.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    n = u.shape[0]
    if omit_p is None:
        omit_p = np.full(n, -1, dtype=np.int64)
    if omit_q is None:
        omit_q = np.full(n, -1, dtype=np.int64)
    omit_p = np.ascontiguousarray(omit_p, dtype=np.int64)
    omit_q = np.ascontiguousarray(omit_q, dtype=np.int64)
    backend = backend or _BACKEND
    args = (u, omit_p, omit_q, float(mp), float(vp), float(mq), float(vq),
            float(alpha))
    if backend == "numba" and NUMBA_AVAILABLE:
        return _sweep_numba(*args)
    return _sweep_numpy(*args)
