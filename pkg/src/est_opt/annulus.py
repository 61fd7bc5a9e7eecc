"""Absolute-passive eavesdropping: Eve uniformly placed in an annulus around Alice.

Eve's average SNR follows the power-law path loss ``c_0 rho^-eta`` and
``rho^2`` is uniform on ``[rho_i^2, rho_o^2]``; the EST is averaged over
her position in closed form through the lower incomplete gamma function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from ._numerics import golden_section_max
from .core import LN2, Classification, RatePair, SolverConfig, SolverReport
from .errors import DomainError
from .special import _check_n, _out, lower_incomplete_gamma

COARSE_1D = 512
COARSE_2D = 160


@dataclass(frozen=True)
class AnnulusModel:
    rho_i: float
    rho_o: float
    gamma_bar_0: float
    rho_r: float = 1.0
    eta: float = 3.0

    def __post_init__(self):
        if not 0 < self.rho_i < self.rho_o:
            raise DomainError("annulus requires 0 < rho_i < rho_o")
        if not self.eta > 0:
            raise DomainError("path-loss exponent must be positive")
        if not self.gamma_bar_0 > 0 or not self.rho_r > 0:
            raise DomainError("reference SNR and distance must be positive")

    @property
    def c_0(self) -> float:
        return self.gamma_bar_0 * self.rho_r ** self.eta


@dataclass(frozen=True)
class EvePosition:
    rho: np.ndarray | float
    theta: np.ndarray | float


def pathloss_snr(rho, m: AnnulusModel):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("distance must be positive")
    return _out(m.c_0 * rho ** (-m.eta))


def sample_eve_position(rng: np.random.Generator, m: AnnulusModel, size=None) -> EvePosition:
    """Uniform position in the annulus: ``rho^2`` uniform, angle uniform."""
    rho_sq = rng.uniform(m.rho_i ** 2, m.rho_o ** 2, size)
    theta = rng.uniform(0.0, 2.0 * math.pi, size)
    rho = np.clip(np.sqrt(rho_sq), m.rho_i, m.rho_o)
    if size is None:
        return EvePosition(float(rho), float(theta))
    return EvePosition(rho, theta)


def annulus_secure_probability(r_e, n_e, m: AnnulusModel):
    """Position-averaged ``Pr(C_E <= r_e)`` over the annulus."""
    n = _check_n(n_e)
    r_e = np.asarray(r_e, dtype=float)
    if np.any(r_e < 0):
        raise DomainError("redundancy rate must be nonnegative")
    u = np.expm1(r_e * LN2) / m.c_0
    pos = u > 0
    us = np.where(pos, u, 1.0)
    xo = us * m.rho_o ** m.eta
    xi = us * m.rho_i ** m.eta
    scale = 2.0 / (m.eta * (m.rho_o ** 2 - m.rho_i ** 2)) * us ** (-2.0 / m.eta)
    total = np.zeros(u.shape)
    for j in range(n):
        v = j + 2.0 / m.eta
        diff = lower_incomplete_gamma(v, xo) - lower_incomplete_gamma(v, xi)
        total = total + np.exp(-gammaln(j + 1.0)) * diff
    secure = 1.0 - scale * total
    # for small arguments sum the Poisson tail j >= n instead of 1 - (j < n)
    small = pos & (xo < n)
    if np.any(small):
        secure = np.where(small, _tail(n, m, xo, xi, scale, small), secure)
    secure = np.where(pos, secure, 0.0)
    return _out(np.clip(secure, 0.0, 1.0))


def _tail(n, m, xo, xi, scale, mask):
    xo, xi, sc = xo[mask], xi[mask], scale[mask]
    acc = np.zeros(xo.shape)
    for j in range(n, n + 500):
        v = j + 2.0 / m.eta
        term = np.exp(-gammaln(j + 1.0)) * (lower_incomplete_gamma(v, xo) - lower_incomplete_gamma(v, xi))
        acc = acc + term
        if np.all(term <= 1e-17 * acc):
            break
    out = np.zeros(mask.shape)
    out[mask] = sc * acc
    return out


def avg_est_adaptive_annulus(r_e, c_b, n_e, m: AnnulusModel):
    """Annulus-averaged adaptive EST for a realized capacity ``c_b``."""
    r = np.asarray(r_e, dtype=float)
    if np.any(~((r >= 0) & (r <= c_b))):
        raise DomainError(f"r_e must lie in [0, C_B={c_b:g}]")
    return _out((c_b - r) * annulus_secure_probability(r, n_e, m))


def avg_est_fixed_annulus(r: RatePair, gamma_bar_b, n_e, m: AnnulusModel):
    r_b = np.asarray(r.r_b, dtype=float)
    r_e = np.asarray(r.r_e, dtype=float)
    if np.any(~(r_e > 0)) or np.any(~(r_e < r_b)):
        raise DomainError("fixed-rate EST requires 0 < r_e < r_b")
    reliable = np.exp(-np.expm1(r_b * LN2) / gamma_bar_b)
    return _out((r_b - r_e) * reliable * annulus_secure_probability(r_e, n_e, m))


def _fixed_unchecked(r_b, r_e, gamma_bar_b, n_e, m):
    ok = (r_e > 0) & (r_e < r_b)
    re_safe = np.where(ok, r_e, 0.0)
    val = (r_b - r_e) * np.exp(-np.expm1(r_b * LN2) / gamma_bar_b) \
        * annulus_secure_probability(re_safe, n_e, m)
    return np.where(ok, val, -np.inf)


def optimize_annulus_adaptive(c_b, n_e, m: AnnulusModel, cfg: SolverConfig = SolverConfig()) -> SolverReport:
    """Maximize the annulus-averaged adaptive EST over ``0 < r_e < C_B``.

    Coarse grid to bracket the peak, then golden-section search.
    """
    if not c_b > 0:
        raise DomainError("c_b must be positive")
    grid = np.linspace(0.0, c_b, COARSE_1D + 1)
    vals = avg_est_adaptive_annulus(grid, c_b, n_e, m)
    k = int(np.argmax(vals))
    if vals[k] <= 0 or k in (0, COARSE_1D):
        return SolverReport(0.0, c_b, 0.0, 0.0, math.nan, 0, math.nan,
                            Classification.INCONCLUSIVE, "grid",
                            status="no_interior_stationary_point", stationary_points=0)

    def f(x):
        return float(avg_est_adaptive_annulus(x, c_b, n_e, m))

    x, width, iters = golden_section_max(f, grid[k - 1], grid[k + 1], cfg.tolerance, 10 * cfg.max_iter)
    h = min(1e-5, 0.5 * x, 0.5 * (c_b - x))
    fx = f(x)
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * fx + f(x - h)) / h ** 2
    cls = Classification.LOCAL_MAX if d2 < 0 else Classification.SADDLE_OR_MIN
    return SolverReport(float(x), c_b, fx, float(width), abs(d1), iters, d2, cls, "golden")


def optimize_annulus_fixed(gamma_bar_b, n_e, m: AnnulusModel, cfg: SolverConfig = SolverConfig()) -> SolverReport:
    """Maximize the annulus-averaged fixed-rate EST over ``0 < r_e < r_b``.

    Derivative-free: coarse grid on ``(0, log2(1 + 20 gamma_bar_b))^2``
    followed by Nelder-Mead refinement.
    """
    if not gamma_bar_b > 0:
        raise DomainError("gamma_bar_b must be positive")
    r_max = math.log2(1.0 + 20.0 * gamma_bar_b)
    axis = np.linspace(0.0, r_max, COARSE_2D + 1)[1:]
    rb, re_ = np.meshgrid(axis, axis, indexing="ij")
    vals = _fixed_unchecked(rb, re_, gamma_bar_b, n_e, m)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    step = axis[1] - axis[0]

    def neg(x):
        if not 0 < x[1] < x[0]:
            return math.inf
        return -float(avg_est_fixed_annulus(RatePair(x[0], x[1]), gamma_bar_b, n_e, m))

    simplex = np.array([[axis[i], axis[j]], [axis[i] + step / 2, axis[j]], [axis[i], axis[j] + step / 2]])
    opt = minimize(neg, simplex[0], method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": cfg.tolerance, "fatol": 1e-15,
                            "maxiter": 20 * cfg.max_iter})
    r_b, r_e = float(opt.x[0]), float(opt.x[1])
    width = float(np.max(np.abs(opt.final_simplex[0] - opt.x)))
    hb, he = _fd_hessian(neg, r_b, r_e)
    cls = Classification.LOCAL_MAX if (hb[0] < 0 and hb[0] * hb[2] - hb[1] ** 2 > 0) \
        else Classification.NOT_LOCAL_MAX
    return SolverReport(r_e, r_b, -float(opt.fun), width, he, int(opt.nit), hb[0] * hb[2] - hb[1] ** 2,
                        cls, "nelder_mead")


def _fd_hessian(neg, r_b, r_e, h=1e-4):
    def f(a, b):
        return -neg((a, b))

    f0 = f(r_b, r_e)
    fbb = (f(r_b + h, r_e) - 2 * f0 + f(r_b - h, r_e)) / h ** 2
    fee = (f(r_b, r_e + h) - 2 * f0 + f(r_b, r_e - h)) / h ** 2
    fbe = (f(r_b + h, r_e + h) - f(r_b + h, r_e - h) - f(r_b - h, r_e + h) + f(r_b - h, r_e - h)) / (4 * h * h)
    gb = (f(r_b + h, r_e) - f(r_b - h, r_e)) / (2 * h)
    ge = (f(r_b, r_e + h) - f(r_b, r_e - h)) / (2 * h)
    return (fbb, fbe, fee), math.hypot(gb, ge)
