"""Small numerical building blocks used by the solvers."""

import math

import numpy as np
from scipy.optimize import brentq

from .errors import QuadratureNotConvergedError

# brentq tolerances: purely relative, so steep roots near 0 are still
# pinned down to a few ulps
XTOL = np.finfo(float).tiny
RTOL = 4 * np.finfo(float).eps


def damped_fixed_point(fmap, x0, lo, hi, cfg, patience=30):
    """Iterate ``x <- (1-lam) x + lam fmap(x)`` projected onto ``[lo, hi]``.

    Returns ``(x, residual, iterations, converged)`` where ``residual`` is
    ``|x - fmap(x)|`` at the returned iterate.  Gives up early once the
    best residual has not improved for ``patience`` iterations.
    """
    lam = cfg.damping
    x = min(max(x0, lo), hi)
    best_x, best_res, best_k = x, math.inf, 0
    for k in range(1, cfg.max_iter + 1):
        fx = fmap(x)
        res = abs(x - fx) if math.isfinite(fx) else math.inf
        if res < best_res:
            best_x, best_res, best_k = x, res, k
        if res < cfg.tolerance:
            return x, res, k, True
        if k - best_k > patience:
            return best_x, best_res, k, False
        step = (1.0 - lam) * x + lam * fx if math.isfinite(fx) else (hi if fx > 0 else lo)
        x = min(max(step, lo), hi)
    return best_x, best_res, cfg.max_iter, False


def polish_root(h, x, radius, lo, hi):
    """Refine a root of ``h`` near ``x`` by bracketing within ``radius``; keeps ``x`` if no bracket."""
    a, b = max(lo, x - radius), min(hi, x + radius)
    ha, hb = h(a), h(b)
    if ha == 0.0:
        return a
    if hb == 0.0:
        return b
    if not ha * hb < 0:
        return x
    return brentq(h, a, b, xtol=XTOL, rtol=RTOL)


def sign_changes(values):
    s = np.sign(np.asarray(values, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


_GL_CACHE = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def adaptive_gauss_legendre(f, a, b, tol, nodes=16, max_depth=40):
    """Integrate ``f`` (vectorized over node arrays) on ``[a, b]``.

    Each panel is accepted when its ``nodes``-point rule agrees with the sum
    over its two halves to ``tol`` (absolute, scaled by the panel share of
    the interval, with a relative floor).
    """
    x, w = _gl(nodes)

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        return half * np.dot(w, f(half * x + 0.5 * (hi + lo)))

    total = 0.0
    stack = [(a, b, rule(a, b), 0)]
    width = b - a
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        err = abs(left + right - whole)
        if err <= max(tol * (hi - lo) / width, 1e-14 * abs(left + right)):
            total += left + right
        elif depth >= max_depth:
            raise QuadratureNotConvergedError(
                f"quadrature panel [{lo:g}, {hi:g}] did not converge (err {err:.3g})",
                best=total,
            )
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a, b, tol, max_iter=2000):
    """Golden-section search for a maximum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, final_bracket_width, iterations)``.
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    k = 0
    while b - a > tol and k < max_iter:
        k += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, b - a, k
