"""Special functions and SNR distribution CDFs.

Everything here accepts scalars or numpy arrays and broadcasts; scalar
inputs give Python floats back.
"""

import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

_EPS = np.finfo(float).eps
_MAX_TERMS = 2000


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def db_to_linear(db):
    return _out(10.0 ** (np.asarray(db, dtype=float) / 10.0))


def linear_to_db(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("linear SNR must be positive to convert to dB")
    return _out(10.0 * np.log10(x))


def _lower_series(v, x):
    # gamma(v, x) = x^v e^-x sum_n x^n / (v (v+1) ... (v+n))
    term = 1.0 / v
    total = term.copy()
    ap = v.copy()
    active = np.ones(v.shape, dtype=bool)
    for _ in range(_MAX_TERMS):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active = np.abs(term) > _EPS * np.abs(total)
        if not active.any():
            break
    with np.errstate(divide="ignore"):
        logpre = v * np.log(x) - x
    return total * np.exp(logpre)


def _upper_cf(v, x):
    # Gamma(v, x) by the modified Lentz continued fraction
    tiny = 1e-300
    b = x + 1.0 - v
    c = np.full(v.shape, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(v.shape, dtype=bool)
    for i in range(1, _MAX_TERMS):
        an = -i * (i - v)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = c * d
        h = np.where(active, h * delta, h)
        active = np.abs(delta - 1.0) > _EPS
        if not active.any():
            break
    return h * np.exp(v * np.log(x) - x)


def lower_incomplete_gamma(v, x):
    """Unregularized lower incomplete gamma ``int_0^x t^(v-1) e^-t dt``.

    Series expansion below ``x = v + 1``, continued fraction for the upper
    function above it.
    """
    v, x = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(v > 0)):
        raise DomainError("lower_incomplete_gamma requires v > 0")
    if np.any(~(x >= 0)):
        raise DomainError("lower_incomplete_gamma requires x >= 0")
    v1, x1 = v.ravel(), x.ravel()
    out = np.zeros(v1.shape)
    series = (x1 < v1 + 1.0) & (x1 > 0)
    cf = (x1 >= v1 + 1.0) & np.isfinite(x1)
    if series.any():
        out[series] = _lower_series(v1[series], x1[series])
    if cf.any():
        vv = v1[cf]
        with np.errstate(over="ignore"):
            out[cf] = np.exp(gammaln(vv)) - _upper_cf(vv, x1[cf])
    out[np.isinf(x1)] = np.exp(gammaln(v1[np.isinf(x1)]))
    return _out(out.reshape(v.shape))


def _check_n(n_e):
    if int(n_e) != n_e or n_e < 1:
        raise DomainError(f"antenna count must be a positive integer, got {n_e!r}")
    return int(n_e)


def _erlang_split(y, n):
    """Return (cdf, sf) of the unit-scale Erlang(n) law at ``y``.

    Below the mode-ish threshold ``y < n`` the CDF is summed as the
    Poisson tail ``e^-y sum_{k>=n} y^k/k!`` so it keeps full relative
    precision as ``y -> 0``; above it the survival sum is used directly.
    """
    y = np.asarray(y, dtype=float)
    if n == 1:
        cdf = -np.expm1(-y)
        return cdf, np.exp(-y)
    small = y < n
    cdf = np.empty(y.shape)
    sf = np.empty(y.shape)
    if small.any():
        ys = y[small]
        with np.errstate(divide="ignore"):
            term = np.exp(n * np.log(ys) - ys - gammaln(n + 1.0))
        total = term.copy()
        k = n
        for _ in range(_MAX_TERMS):
            k += 1
            term = term * ys / k
            total = total + term
            if np.all(term <= _EPS * total):
                break
        cdf[small] = total
        sf[small] = 1.0 - total
    big = ~small
    if big.any():
        yb = y[big]
        term = np.exp(-yb)
        acc = term.copy()
        for j in range(1, n):
            term = term * yb / j
            acc = acc + term
        sf[big] = acc
        cdf[big] = 1.0 - acc
    return cdf, sf


def _erlang_cdf_scalar(y, n):
    """Scalar twin of :func:`_erlang_split` (CDF only) for solver inner loops."""
    if n == 1:
        return -math.expm1(-y)
    if y <= 0.0:
        return 0.0
    if y < n:
        term = math.exp(n * math.log(y) - y - math.lgamma(n + 1.0))
        total = term
        k = n
        while term > _EPS * total and k < n + _MAX_TERMS:
            k += 1
            term *= y / k
            total += term
        return total
    term = math.exp(-y)
    acc = term
    for j in range(1, n):
        term *= y / j
        acc += term
    return 1.0 - acc


def gamma_snr_cdf(x, n_e, scale):
    """CDF of an MRC output SNR: Gamma with integer shape ``n_e`` and ``scale``."""
    n = _check_n(n_e)
    x = np.asarray(x, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(~(scale > 0)):
        raise DomainError("gamma_snr_cdf requires scale > 0")
    if np.any(x < 0):
        raise DomainError("gamma_snr_cdf requires x >= 0")
    shape = np.broadcast(x, scale).shape
    y = np.broadcast_to(x / scale, shape)
    cdf, _ = _erlang_split(y, n)
    return _out(cdf)


def gamma_snr_sf(x, n_e, scale):
    """Survival ``1 - gamma_snr_cdf`` computed without cancellation."""
    n = _check_n(n_e)
    scale = np.asarray(scale, dtype=float)
    if np.any(~(scale > 0)):
        raise DomainError("gamma_snr_sf requires scale > 0")
    x = np.asarray(x, dtype=float)
    y = np.broadcast_to(x / scale, np.broadcast(x, scale).shape)
    _, sf = _erlang_split(y, n)
    return _out(sf)


def exp_snr_cdf(x, mean):
    """CDF of an exponentially distributed SNR with the given mean."""
    x = np.asarray(x, dtype=float)
    mean = np.asarray(mean, dtype=float)
    if np.any(~(mean > 0)):
        raise DomainError("exp_snr_cdf requires mean > 0")
    if np.any(x < 0):
        raise DomainError("exp_snr_cdf requires x >= 0")
    return _out(-np.expm1(-x / mean))
