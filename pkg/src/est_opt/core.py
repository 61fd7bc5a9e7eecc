"""Shared domain types, the EST definition and the outage primitives.

Rates are in bits per channel use and SNRs are linear everywhere in the
library; dB only appears at the CLI boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .special import _check_n, _erlang_cdf_scalar, _erlang_split, _out

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelParams:
    gamma_bar_b: float
    gamma_bar_e: float
    n_e: int

    def __post_init__(self):
        if not self.gamma_bar_b > 0:
            raise DomainError("gamma_bar_b must be positive")
        if not self.gamma_bar_e > 0:
            raise DomainError("gamma_bar_e must be positive")
        _check_n(self.n_e)


@dataclass(frozen=True)
class RatePair:
    r_b: float
    r_e: float

    @property
    def r_s(self) -> float:
        return self.r_b - self.r_e


def capacity(snr):
    """Instantaneous capacity ``log2(1 + snr)``."""
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0):
        raise DomainError("SNR must be nonnegative")
    return _out(np.log1p(snr) / LN2)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iter: int = 200
    damping: float = 0.5

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive Gauss-Legendre settings for averages over the main-channel SNR.

    The exponential law is truncated at the quantile leaving ``tail_mass``
    uncovered.
    """

    tolerance: float = 1e-8
    nodes: int = 16
    max_depth: int = 40
    tail_mass: float = 1e-9


class Classification(str, enum.Enum):
    LOCAL_MAX = "local_max"
    SADDLE_OR_MIN = "saddle_or_min"
    NOT_LOCAL_MAX = "not_local_max"
    INCONCLUSIVE = "inconclusive"


@dataclass
class HessianReport:
    a: float
    b: float
    c: float
    det: float = field(init=False)
    classification: Classification = field(init=False)

    def __post_init__(self):
        self.det = self.a * self.c - self.b * self.b
        if not all(map(math.isfinite, (self.a, self.b, self.c))):
            self.classification = Classification.INCONCLUSIVE
        elif self.a < 0 and self.det > 0:
            self.classification = Classification.LOCAL_MAX
        else:
            self.classification = Classification.NOT_LOCAL_MAX


@dataclass
class SolverReport:
    """Outcome of a rate optimization.

    ``residual`` is the achieved fixed-point residual (or, for
    derivative-free searches, the size of the final simplex/bracket) and
    ``gradient`` the achieved first-order derivative norm.
    """

    r_e: float
    r_b: float
    est: float
    residual: float
    gradient: float
    iterations: int
    second_order: float
    classification: Classification
    method: str
    status: str = "converged"
    stationary_points: Optional[int] = None
    hessian: Optional[HessianReport] = None

    @property
    def rate(self) -> float:
        return self.r_e

    def to_dict(self) -> dict:
        d = {
            "r_b": self.r_b,
            "r_e": self.r_e,
            "est": self.est,
            "residual": self.residual,
            "gradient": self.gradient,
            "iterations": self.iterations,
            "second_order": self.second_order,
            "classification": self.classification.value,
            "method": self.method,
            "status": self.status,
            "stationary_points": self.stationary_points,
        }
        if self.hessian is not None:
            h = self.hessian
            d["hessian"] = {"a": h.a, "b": h.b, "c": h.c, "det": h.det}
        return d


def _check_prob(p, name):
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0) & (p <= 1))):
        raise DomainError(f"{name} must lie in [0, 1]")
    return p


def est(r_b, r_e, reliability_outage, secrecy_outage):
    """Effective secrecy throughput from the rates and the two outage probabilities."""
    r_b = np.asarray(r_b, dtype=float)
    r_e = np.asarray(r_e, dtype=float)
    if np.any(r_e < 0) or np.any(~(r_e < r_b)):
        raise DomainError("EST requires 0 <= r_e < r_b")
    rel = _check_prob(reliability_outage, "reliability_outage")
    sec = _check_prob(secrecy_outage, "secrecy_outage")
    return _out((r_b - r_e) * (1.0 - rel) * (1.0 - sec))


# ---------------------------------------------------------------------------
# Eve-side primitives shared by both schemes. ``y = (2^r_e - 1)/gamma_bar_e``
# is the normalized SNR threshold Eve must stay below.


def _eve_threshold(r_e, gamma_bar_e):
    r_e = np.asarray(r_e, dtype=float)
    gamma_bar_e = np.asarray(gamma_bar_e, dtype=float)
    if np.any(~(gamma_bar_e > 0)):
        raise DomainError("gamma_bar_e must be positive")
    if np.any(r_e < 0):
        raise DomainError("redundancy rate must be nonnegative")
    return np.expm1(r_e * LN2) / gamma_bar_e


def secure_probability(r_e, gamma_bar_e, n_e):
    """``F_E(2^r_e - 1)``: probability that Eve's capacity stays below ``r_e``."""
    n = _check_n(n_e)
    cdf, _ = _erlang_split(_eve_threshold(r_e, gamma_bar_e), n)
    return _out(cdf)


def secrecy_outage(r_e, gamma_bar_e, n_e):
    """``Pr(r_e < C_E) = 1 - F_E(2^r_e - 1)``; shared by both schemes."""
    n = _check_n(n_e)
    _, sf = _erlang_split(_eve_threshold(r_e, gamma_bar_e), n)
    return _out(sf)


def secure_probability_slope(r_e, gamma_bar_e, n_e):
    """Derivative of :func:`secure_probability` with respect to ``r_e``."""
    n = _check_n(n_e)
    y = _eve_threshold(r_e, gamma_bar_e)
    r_e = np.asarray(r_e, dtype=float)
    dy = np.exp2(r_e) * LN2 / np.asarray(gamma_bar_e, dtype=float)
    with np.errstate(divide="ignore"):
        logpdf = (n - 1) * np.log(y) - y - gammaln(n)
    if n == 1:
        logpdf = -y
    return _out(dy * np.exp(logpdf))


def secure_ratio(r_e, gamma_bar_e, n_e):
    """``F_E / F_E'`` as a function of ``r_e``, free of overflow and cancellation.

    This is the quantity both first-order conditions reduce to: the
    adaptive stationary point satisfies ``C_B - r_e = ratio`` and the
    fixed-rate one ``r_b - r_e = ratio``.  Returns ``inf`` when the ratio
    exceeds the float range.
    """
    n = _check_n(n_e)
    if np.ndim(r_e) == 0 and np.ndim(gamma_bar_e) == 0:
        return _secure_ratio_scalar(float(r_e), float(gamma_bar_e), n)
    r_e = np.asarray(r_e, dtype=float)
    gamma_bar_e = np.asarray(gamma_bar_e, dtype=float)
    y = np.asarray(_eve_threshold(r_e, gamma_bar_e))
    dy = np.broadcast_to(np.exp2(r_e) * LN2 / gamma_bar_e, y.shape)
    out = np.empty(y.shape)
    small = y <= n
    if small.any():
        ys = y[small]
        # ratio * dy = y * sum_m y^m (n-1)!/(n+m)!
        term = np.full(ys.shape, 1.0 / n)
        total = term.copy()
        m = 0
        for _ in range(2000):
            m += 1
            term = term * ys / (n + m)
            total = total + term
            if np.all(term <= 1e-17 * total):
                break
        out[small] = ys * total / dy[small]
    big = ~small
    if big.any():
        yb = y[big]
        cdf, _ = _erlang_split(yb, n)
        logr = np.log(cdf) + yb + gammaln(n) - (n - 1) * np.log(yb) - np.log(dy[big])
        with np.errstate(over="ignore"):
            out[big] = np.exp(np.minimum(logr, 800.0))
    return _out(out)


def _secure_ratio_scalar(r_e, gamma_bar_e, n):
    if not gamma_bar_e > 0:
        raise DomainError("gamma_bar_e must be positive")
    if r_e < 0:
        raise DomainError("redundancy rate must be nonnegative")
    y = math.expm1(r_e * LN2) / gamma_bar_e
    dy = 2.0 ** r_e * LN2 / gamma_bar_e
    if y <= n:
        term = 1.0 / n
        total = term
        m = 0
        while term > 1e-17 * total and m < 2000:
            m += 1
            term *= y / (n + m)
            total += term
        return y * total / dy
    logr = (math.log(_erlang_cdf_scalar(y, n)) + y + math.lgamma(n)
            - (n - 1) * math.log(y) - math.log(dy))
    return math.exp(logr) if logr < 700.0 else math.inf
