"""Fixed-rate transmission: both rates chosen from channel statistics only."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import factorial

from ._numerics import RTOL, XTOL, damped_fixed_point, polish_root
from .adaptive import RATE_EPS, _slope_log_derivative
from .core import (
    LN2,
    ChannelParams,
    HessianReport,
    RatePair,
    SolverConfig,
    SolverReport,
    secrecy_outage,
    secure_probability,
    secure_probability_slope,
    secure_ratio,
)
from .errors import DomainError, InfeasibleError, NotConvergedError
from .special import _check_n, _out, exp_snr_cdf

GRID_FALLBACK_POINTS = 256


def reliability_outage_fixed(r_b, gamma_bar_b):
    """``Pr(r_b > C_B)`` under Rayleigh fading of the main channel."""
    r_b = np.asarray(r_b, dtype=float)
    if np.any(r_b < 0):
        raise DomainError("r_b must be nonnegative")
    return exp_snr_cdf(np.expm1(r_b * LN2), gamma_bar_b)


def _reliable_probability(r_b, gamma_bar_b):
    return np.exp(-np.expm1(np.asarray(r_b, dtype=float) * LN2) / gamma_bar_b)


def secrecy_outage_fixed(r_e, gamma_bar_e, n_e):
    return secrecy_outage(r_e, gamma_bar_e, n_e)


def _rates(r: RatePair):
    r_b = np.asarray(r.r_b, dtype=float)
    r_e = np.asarray(r.r_e, dtype=float)
    if np.any(~(r_e > 0)) or np.any(~(r_e < r_b)):
        raise DomainError("fixed-rate EST requires 0 < r_e < r_b")
    return r_b, r_e


def est_fixed(r: RatePair, p: ChannelParams):
    """EST of the fixed-rate scheme; broadcasts over array-valued rates."""
    r_b, r_e = _rates(r)
    return _out((r_b - r_e) * _reliable_probability(r_b, p.gamma_bar_b)
                * secure_probability(r_e, p.gamma_bar_e, p.n_e))


def est_fixed_unchecked(r_b, r_e, p: ChannelParams):
    """Like :func:`est_fixed` but returns 0 outside the feasible set (for grids)."""
    r_b = np.asarray(r_b, dtype=float)
    r_e = np.asarray(r_e, dtype=float)
    ok = (r_e > 0) & (r_e < r_b)
    re_safe = np.where(ok, r_e, 0.0)
    val = (r_b - r_e) * _reliable_probability(r_b, p.gamma_bar_b) \
        * secure_probability(re_safe, p.gamma_bar_e, p.n_e)
    return _out(np.where(ok, val, 0.0))


def f_term(n_e, r_e, gamma_bar_e):
    n = _check_n(n_e)
    y = np.expm1(np.asarray(r_e, dtype=float) * LN2) / gamma_bar_e
    term = np.ones_like(y)
    total = term.copy()
    for j in range(1, n):
        term = term * y / j
        total = total + term
    return _out(total)


def g_term(n_e, r_e, gamma_bar_e):
    n = _check_n(n_e)
    r_e = np.asarray(r_e, dtype=float)
    y = np.expm1(r_e * LN2) / gamma_bar_e
    power = y ** (n - 1) if n > 1 else np.ones_like(y)
    return _out(np.exp2(r_e) * LN2 / (gamma_bar_e * factorial(n - 1)) * power)


def gradient_fixed(r: RatePair, p: ChannelParams):
    """Partial derivatives ``(dPsi/dr_b, dPsi/dr_e)``."""
    r_b, r_e = _rates(r)
    sb = _reliable_probability(r_b, p.gamma_bar_b)
    kb = np.exp2(r_b) * LN2 / p.gamma_bar_b
    d = secure_probability(r_e, p.gamma_bar_e, p.n_e)
    e = secure_probability_slope(r_e, p.gamma_bar_e, p.n_e)
    t = r_b - r_e
    return _out(sb * d * (1.0 - t * kb)), _out(sb * (-d + t * e))


def hessian_fixed(r: RatePair, p: ChannelParams) -> HessianReport:
    r_b, r_e = (float(r.r_b), float(r.r_e))
    if not 0 < r_e < r_b:
        raise DomainError("Hessian requires 0 < r_e < r_b")
    sb = math.exp(-math.expm1(r_b * LN2) / p.gamma_bar_b)
    kb = 2.0 ** r_b * LN2 / p.gamma_bar_b
    d = float(secure_probability(r_e, p.gamma_bar_e, p.n_e))
    e = float(secure_probability_slope(r_e, p.gamma_bar_e, p.n_e))
    t = r_b - r_e
    a = -kb * sb * d * (2.0 + LN2 * t * (1.0 - 2.0 ** r_b / p.gamma_bar_b))
    b = kb * sb * d + sb * (1.0 - t * kb) * e
    c = sb * e * (-2.0 + t * float(_slope_log_derivative(r_e, p.gamma_bar_e, p.n_e)))
    return HessianReport(a, b, c)


def _codeword_gap(r_e, gamma_bar_b):
    """Solve the codeword-rate condition ``(r_b - r_e) 2^r_b ln2 = gamma_bar_b`` for ``r_b - r_e``."""
    c = gamma_bar_b * 2.0 ** (-r_e) / LN2
    if c == 0.0:
        return 0.0
    hi = math.log2(1.0 + c) + 1.0
    return brentq(lambda t: t * 2.0 ** t - c, 0.0, hi, xtol=XTOL, rtol=RTOL)


def _redundancy_given_codeword(r_b, p):
    """Solve ``r_b - r_e = F_E/F_E'`` for ``r_e`` in ``(eps, r_b)``."""
    def k(x):
        return r_b - x - secure_ratio(x, p.gamma_bar_e, p.n_e)

    lo = min(RATE_EPS, 0.5 * r_b)
    if k(lo) <= 0:
        return lo
    return brentq(k, lo, r_b, xtol=XTOL, rtol=RTOL)


def _foc(r_b, r_e, p):
    """The two first-order conditions in rate units (zero at a stationary pair)."""
    phi_b = r_b - r_e - p.gamma_bar_b / (2.0 ** r_b * LN2)
    phi_e = r_b - r_e - float(secure_ratio(r_e, p.gamma_bar_e, p.n_e))
    return phi_b, phi_e


def _foc_residual(r_b, r_e, p):
    return max(map(abs, _foc(r_b, r_e, p)))


def _foc_newton(r_b, r_e, p, steps=50, tol=1e-15):
    """Newton on the rate-unit first-order conditions.

    Working in rate units keeps the system well scaled even where the EST
    itself is vanishingly small.  Uses ``d(F/F')/dr = 1 - (F/F') (log F')'``.
    """
    res = _foc_residual(r_b, r_e, p)
    for _ in range(steps):
        if res < tol:
            break
        phi_b, phi_e = _foc(r_b, r_e, p)
        ratio = float(secure_ratio(r_e, p.gamma_bar_e, p.n_e))
        k = float(_slope_log_derivative(r_e, p.gamma_bar_e, p.n_e))
        j11 = 1.0 + p.gamma_bar_b / 2.0 ** r_b
        j21, j22 = 1.0, ratio * k - 2.0
        det = j11 * j22 + j21  # det of [[j11, -1], [j21, j22]]
        if not (math.isfinite(det) and det != 0.0):
            break
        db = (phi_b * j22 + phi_e) / det
        de = (j11 * phi_e - phi_b) / det
        step = 1.0
        while step > 1e-6:
            nb, ne = r_b - step * db, r_e - step * de
            if 0 < ne < nb:
                nres = _foc_residual(nb, ne, p)
                if nres < res:
                    break
            step *= 0.5
        else:
            break
        r_b, r_e, res = nb, ne, nres
    return r_b, r_e


def _grid_fallback(p, cfg):
    r_max = math.log2(1.0 + 20.0 * p.gamma_bar_b)
    axis = np.linspace(0.0, r_max, GRID_FALLBACK_POINTS + 1)[1:]
    rb, re_ = np.meshgrid(axis, axis, indexing="ij")
    vals = est_fixed_unchecked(rb, re_, p)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)

    def neg(x):
        if not 0 < x[1] < x[0]:
            return 0.0
        return -float(est_fixed(RatePair(x[0], x[1]), p))

    opt = minimize(neg, [axis[i], axis[j]], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 20 * cfg.max_iter})
    return float(opt.x[0]), float(opt.x[1]), int(opt.nit)


def _report(r_b, r_e, p, iters, method, status="converged"):
    pair = RatePair(r_b, r_e)
    gb, ge = gradient_fixed(pair, p)
    h = hessian_fixed(pair, p)
    return SolverReport(
        r_e=r_e,
        r_b=r_b,
        est=float(est_fixed(pair, p)),
        residual=_foc_residual(r_b, r_e, p),
        gradient=math.hypot(gb, ge),
        iterations=iters,
        second_order=h.det,
        classification=h.classification,
        method=method,
        status=status,
        hessian=h,
    )


def solve_rate_pair(p: ChannelParams, cfg: SolverConfig = SolverConfig()) -> SolverReport:
    """Jointly stationary ``(r_b, r_e)`` of the fixed-rate EST.

    Block iteration on the two first-order conditions starting from
    ``r_e = 0``: the codeword condition gives ``r_b`` for the current
    ``r_e``, the redundancy condition then gives a new ``r_e`` for that
    ``r_b`` (damped by ``cfg.damping``).  Newton on the first-order
    conditions polishes the result; a grid search with simplex refinement
    is the last resort.
    """
    lam = cfg.damping
    r_e = 0.0
    r_b = r_e + _codeword_gap(r_e, p.gamma_bar_b)
    converged = False
    iters = 0
    for iters in range(1, cfg.max_iter + 1):
        target = _redundancy_given_codeword(r_b, p)
        r_e = (1.0 - lam) * r_e + lam * target
        r_b = r_e + _codeword_gap(r_e, p.gamma_bar_b)
        if _foc_residual(r_b, r_e, p) < cfg.tolerance:
            converged = True
            break
        if r_b - r_e <= 0 or not r_e > 0:
            break

    method = "fixed_point"
    if 0 < r_e < r_b:
        r_b, r_e = _foc_newton(r_b, r_e, p)
        if not converged:
            method = "fixed_point+newton"
            converged = _foc_residual(r_b, r_e, p) < cfg.tolerance
    if not converged:
        r_b, r_e, nit = _grid_fallback(p, cfg)
        iters += nit
        method = "grid"
        if 0 < r_e < r_b:
            r_b, r_e = _foc_newton(r_b, r_e, p)
        if not (0 < r_e < r_b):
            raise InfeasibleError(f"search ended at infeasible pair r_b={r_b:g}, r_e={r_e:g}")
        if _foc_residual(r_b, r_e, p) >= cfg.tolerance:
            raise NotConvergedError("rate-pair search did not converge",
                                    best=_report(r_b, r_e, p, iters, method, status="not_converged"))
    if not (0 < r_e < r_b):
        raise InfeasibleError(f"converged pair is infeasible: r_b={r_b:g}, r_e={r_e:g}")
    return _report(r_b, r_e, p, iters, method)


def asymptotic_rate_pair_low_eve_snr(gamma_bar_b, cfg: SolverConfig = SolverConfig()) -> RatePair:
    """Weak-eavesdropper limit: ``r_b = gamma_bar_b / (2^r_b ln2)`` and ``r_e = 0``."""
    if not gamma_bar_b > 0:
        raise DomainError("gamma_bar_b must be positive")

    def fmap(x):
        return gamma_bar_b * 2.0 ** (-x) / LN2

    hi = math.log2(1.0 + gamma_bar_b) + 1.0
    x, res, _, ok = damped_fixed_point(fmap, 0.5 * hi, 0.0, hi, cfg)
    if ok:
        x = polish_root(lambda t: t - fmap(t), x, 100 * res + 1e-14, 0.0, hi)
    else:
        x = brentq(lambda t: t - fmap(t), 0.0, hi, xtol=XTOL, rtol=RTOL)
        if abs(x - fmap(x)) >= cfg.tolerance:
            raise NotConvergedError("low-SNR codeword fixed point did not converge", best=x)
    return RatePair(float(x), 0.0)


def _high_snr_gap(r_e):
    return -math.expm1(-r_e * LN2) / LN2


def asymptotic_rate_pair_high_eve_snr(gamma_bar_b, cfg: SolverConfig = SolverConfig()) -> RatePair:
    """Strong-eavesdropper limit (single antenna); independent of ``gamma_bar_e``.

    Solves ``r_b = r_e + (2^r_e - 1)/(2^r_e ln2)`` together with
    ``r_e = r_b - gamma_bar_b/(2^r_b ln2)``.  Eliminating ``r_b`` gives the
    contraction ``r_e = log2(1 + gamma_bar_b 2^-gap(r_e))`` iterated here.
    """
    if not gamma_bar_b > 0:
        raise DomainError("gamma_bar_b must be positive")

    def fmap(x):
        return math.log2(1.0 + gamma_bar_b * 2.0 ** (-_high_snr_gap(x)))

    hi = math.log2(1.0 + gamma_bar_b)
    x, res, _, ok = damped_fixed_point(fmap, 0.0, 0.0, hi, cfg)
    if ok:
        x = polish_root(lambda t: t - fmap(t), x, 100 * res + 1e-14, 0.0, hi)
    else:
        x = brentq(lambda t: t - fmap(t), 0.0, hi, xtol=XTOL, rtol=RTOL)
    r_e = float(x)
    r_b = r_e + _high_snr_gap(r_e)
    if not 0 < r_e < r_b:
        raise InfeasibleError("strong-eavesdropper limit has no interior solution")
    res = max(abs(r_b - r_e - _high_snr_gap(r_e)), abs(r_e - r_b + gamma_bar_b / (2.0 ** r_b * LN2)))
    if res >= cfg.tolerance:
        raise NotConvergedError("strong-eavesdropper fixed point did not converge", best=RatePair(r_b, r_e))
    return RatePair(r_b, r_e)
