"""Adaptive transmission: the codeword rate tracks ``C_B`` and only ``r_e`` is chosen."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._numerics import RTOL, XTOL, adaptive_gauss_legendre, damped_fixed_point, polish_root, sign_changes
from .core import (
    LN2,
    Classification,
    QuadratureConfig,
    SolverConfig,
    SolverReport,
    capacity,
    secrecy_outage,
    secure_probability,
    secure_probability_slope,
    secure_ratio,
)
from .errors import DomainError, NotConvergedError
from .special import _check_n, _out

RATE_EPS = 1e-9
SCAN_POINTS = 513


@dataclass(frozen=True)
class AdaptiveScenario:
    c_b: float
    gamma_bar_e: float
    n_e: int

    def __post_init__(self):
        if not self.c_b >= 0:
            raise DomainError("c_b must be nonnegative")
        if not self.gamma_bar_e > 0:
            raise DomainError("gamma_bar_e must be positive")
        _check_n(self.n_e)

    @classmethod
    def from_snr(cls, gamma_b, gamma_bar_e, n_e):
        return cls(capacity(gamma_b), gamma_bar_e, n_e)


def secrecy_outage_adaptive(r_e, s: AdaptiveScenario):
    return secrecy_outage(r_e, s.gamma_bar_e, s.n_e)


def _check_closed(r_e, c_b):
    r = np.asarray(r_e, dtype=float)
    if np.any(~((r >= 0) & (r <= c_b))):
        raise DomainError(f"r_e must lie in [0, C_B={c_b:g}]")
    return r


def _check_open(r_e, c_b):
    r = np.asarray(r_e, dtype=float)
    if np.any(~((r > 0) & (r < c_b))):
        raise DomainError(f"r_e must lie in (0, C_B={c_b:g})")
    return r


def est_adaptive(r_e, s: AdaptiveScenario):
    """EST of the adaptive scheme, ``(C_B - r_e) F_E(2^r_e - 1)``."""
    r = _check_closed(r_e, s.c_b)
    return _out((s.c_b - r) * secure_probability(r, s.gamma_bar_e, s.n_e))


def est_adaptive_derivative(r_e, s: AdaptiveScenario):
    r = _check_open(r_e, s.c_b)
    d = secure_probability(r, s.gamma_bar_e, s.n_e)
    e = secure_probability_slope(r, s.gamma_bar_e, s.n_e)
    return _out(-d + (s.c_b - r) * e)


def _slope_log_derivative(r, gamma_bar_e, n_e):
    # d/dr log F_E'(r); the (n_e - 1) term carries the 1/(2^r - 1) pole
    p = np.exp2(r)
    out = LN2 - p * LN2 / gamma_bar_e
    if n_e > 1:
        out = out + (n_e - 1) * p * LN2 / np.expm1(r * LN2)
    return out


def est_adaptive_second_derivative(r_e, s: AdaptiveScenario):
    r = np.asarray(r_e, dtype=float)
    if s.n_e == 1:
        if np.any(~((r >= 0) & (r < s.c_b))):
            raise DomainError(f"r_e must lie in [0, C_B={s.c_b:g})")
    else:
        r = _check_open(r, s.c_b)
    e = secure_probability_slope(r, s.gamma_bar_e, s.n_e)
    k = _slope_log_derivative(r, s.gamma_bar_e, s.n_e)
    return _out(e * (-2.0 + (s.c_b - r) * k))


def fixed_point_map(r_e, s: AdaptiveScenario):
    """Right-hand side of the stationarity fixed point ``r_e = C_B - F_E/F_E'``."""
    return s.c_b - secure_ratio(r_e, s.gamma_bar_e, s.n_e)


def _classify(second):
    if not math.isfinite(second):
        return Classification.INCONCLUSIVE
    return Classification.LOCAL_MAX if second < 0 else Classification.SADDLE_OR_MIN


def _degenerate_report(s):
    return SolverReport(
        r_e=0.0,
        r_b=s.c_b,
        est=0.0,
        residual=0.0,
        gradient=math.nan,
        iterations=0,
        second_order=math.nan,
        classification=Classification.INCONCLUSIVE,
        method="none",
        status="no_interior_stationary_point",
        stationary_points=0,
    )


def solve_redundancy_rate(s: AdaptiveScenario, cfg: SolverConfig = SolverConfig()) -> SolverReport:
    """Locate the stationary redundancy rate of the adaptive EST.

    Damped fixed-point iteration from ``C_B/2``; if it does not settle
    within ``cfg.max_iter`` the derivative is root-bracketed on
    ``(eps, C_B - eps)`` instead.  The derivative sign is evaluated as
    ``sign(C_B - r_e - F_E/F_E')`` which stays exact where ``F_E'``
    underflows.
    """
    c_b = s.c_b
    lo, hi = RATE_EPS, c_b - RATE_EPS
    if not hi > lo:
        return _degenerate_report(s)

    def g(r):
        return c_b - r - secure_ratio(r, s.gamma_bar_e, s.n_e)

    grid = np.linspace(lo, hi, SCAN_POINTS)
    scan = g(grid)
    count = sign_changes(scan)
    if count == 0:
        return _degenerate_report(s)

    x, res, iters, ok = damped_fixed_point(lambda r: fixed_point_map(r, s), 0.5 * c_b, lo, hi, cfg)
    method = "fixed_point"
    if not ok:
        # bracket the sign change nearest the best iterate
        idx = np.flatnonzero(np.sign(scan[1:]) != np.sign(scan[:-1]))
        i = idx[np.argmin(np.abs(grid[idx] - x))]
        try:
            x, info = brentq(g, grid[i], grid[i + 1], xtol=XTOL, rtol=RTOL,
                             maxiter=max(cfg.max_iter, 100), full_output=True)
        except RuntimeError as exc:
            raise NotConvergedError(f"redundancy-rate search failed: {exc}", best=x) from exc
        iters += info.iterations
        res = abs(x - fixed_point_map(x, s))
        method = "bracketed"
        if res >= cfg.tolerance and abs(g(x)) >= cfg.tolerance:
            raise NotConvergedError(f"redundancy-rate residual {res:.3g} above tolerance", best=x)

    # a few Newton steps so the derivative itself meets the tolerance
    deriv = est_adaptive_derivative(x, s)
    for _ in range(5):
        if abs(deriv) < 1e-3 * cfg.tolerance:
            break
        second = est_adaptive_second_derivative(x, s)
        if not second < 0:
            break
        xn = x - deriv / second
        if not lo <= xn <= hi:
            break
        dn = est_adaptive_derivative(xn, s)
        if abs(dn) >= abs(deriv):
            break
        x, deriv = xn, dn
    res = abs(x - fixed_point_map(x, s))
    second = est_adaptive_second_derivative(x, s)
    return SolverReport(
        r_e=float(x),
        r_b=c_b,
        est=est_adaptive(x, s),
        residual=float(res),
        gradient=abs(float(deriv)),
        iterations=iters,
        second_order=float(second),
        classification=_classify(second),
        method=method,
        stationary_points=count,
    )


def asymptotic_redundancy_rate_high_eve_snr(c_b, cfg: SolverConfig = SolverConfig()) -> float:
    """Stationary ``r_e`` in the limit of a strong eavesdropper (single antenna).

    Solves ``r_e = C_B - (1 - 2^-r_e)/ln 2``, which does not involve
    ``gamma_bar_e``.
    """
    if not c_b > 0:
        raise DomainError("c_b must be positive")

    def fmap(r):
        return c_b + math.expm1(-r * LN2) / LN2

    x, res, _, ok = damped_fixed_point(fmap, 0.5 * c_b, 0.0, c_b, cfg)
    if ok:
        return polish_root(lambda r: fmap(r) - r, x, 100 * res + 1e-14, 0.0, c_b)
    root = brentq(lambda r: fmap(r) - r, 0.0, c_b, xtol=XTOL, rtol=RTOL)
    if abs(fmap(root) - root) >= cfg.tolerance:
        raise NotConvergedError("high-SNR redundancy fixed point did not converge", best=root)
    return root


def max_est_adaptive(c_b, gamma_bar_e, n_e, cfg: SolverConfig = SolverConfig()) -> float:
    """Locally maximum adaptive EST for a realized main-channel capacity."""
    rep = solve_redundancy_rate(AdaptiveScenario(c_b, gamma_bar_e, n_e), cfg)
    return rep.est


def average_max_est_adaptive(gamma_bar_b, gamma_bar_e, n_e, cfg: SolverConfig = SolverConfig(),
                             quad: QuadratureConfig = QuadratureConfig()) -> float:
    """Average of the maximized adaptive EST over Rayleigh fading of the main channel.

    Integrates in the normalized variable ``x = gamma_B / gamma_bar_b``
    on ``[0, -ln tail_mass]`` with the exponential weight ``e^-x``.
    """
    if not gamma_bar_b > 0 or not gamma_bar_e > 0:
        raise DomainError("average SNRs must be positive")
    _check_n(n_e)
    upper = -math.log(quad.tail_mass)

    def integrand(xs):
        cb = capacity(gamma_bar_b * np.asarray(xs))
        vals = np.array([max_est_adaptive(c, gamma_bar_e, n_e, cfg) for c in np.atleast_1d(cb)])
        return vals * np.exp(-np.asarray(xs))

    return adaptive_gauss_legendre(integrand, 0.0, upper, quad.tolerance, quad.nodes, quad.max_depth)
