"""Monte Carlo oracle working directly on fading SNR realizations.

Trials are split into fixed-size chunks; chunk ``k`` of a run draws from
its own PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(stream_id, k))``.
Chunks are therefore independent of evaluation order and may run on
several threads, and per-chunk (mean, M2) statistics are merged in chunk
order so results are bit-identical for a given configuration.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adaptive import AdaptiveScenario
from .annulus import AnnulusModel, pathloss_snr, sample_eve_position
from .core import LN2, ChannelParams, RatePair
from .errors import DomainError
from .special import _check_n

log = logging.getLogger(__name__)

CHUNK = 1 << 18


@dataclass(frozen=True)
class SimulationConfig:
    trials: int = 1_000_000
    seed: int = 0
    stream_id: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int = 0
    stream_id: int = 0

    def to_dict(self):
        return {"mean": self.mean, "std_error": self.std_error, "trials": self.trials,
                "seed": self.seed, "stream_id": self.stream_id}


def chunk_rng(cfg: SimulationConfig, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(cfg.stream_id, chunk))
    return np.random.Generator(np.random.PCG64(ss))


def sample_main_snr(rng, gamma_bar_b, size=None):
    """Exponential main-channel SNR with mean ``gamma_bar_b`` (inverse CDF)."""
    if not np.all(np.asarray(gamma_bar_b) > 0):
        raise DomainError("gamma_bar_b must be positive")
    return -gamma_bar_b * np.log1p(-rng.random(size))


def sample_eve_snr(rng, gamma_bar_e, n_e, size=None):
    """MRC output SNR: sum of ``n_e`` i.i.d. exponential branch SNRs."""
    n = _check_n(n_e)
    if not np.all(np.asarray(gamma_bar_e) > 0):
        raise DomainError("gamma_bar_e must be positive")
    shape = (n,) if size is None else (n,) + tuple(np.atleast_1d(size))
    return gamma_bar_e * (-np.log1p(-rng.random(shape))).sum(axis=0)


def _moments(x):
    # shifted by the first sample: constant chunks give their value exactly and M2 = 0
    d = x - x[0]
    dm = float(np.mean(d))
    return x.size, float(x[0]) + dm, float(np.sum((d - dm) ** 2))


def _merge(a, b):
    na, ma, qa = a
    nb, mb, qb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, qa + qb + delta * delta * na * nb / n


def run_trials(score, cfg: SimulationConfig) -> SimEstimate:
    """Apply ``score(rng, size) -> ndarray`` chunk by chunk and aggregate."""
    sizes = [CHUNK] * (cfg.trials // CHUNK)
    if cfg.trials % CHUNK:
        sizes.append(cfg.trials % CHUNK)

    def one(k):
        return _moments(np.asarray(score(chunk_rng(cfg, k), sizes[k]), dtype=float))

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(k) for k in range(len(sizes))]
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mean, m2 = acc
    if n < 2:
        log.warning("single trial: standard error reported as 0")
        se = 0.0
    else:
        se = math.sqrt(m2 / (n - 1) / n)
    return SimEstimate(mean, se, n, cfg.seed, cfg.stream_id)


def _cap(snr):
    return np.log1p(snr) / LN2


def simulate_est_adaptive(r_e, s: AdaptiveScenario, cfg: SimulationConfig) -> SimEstimate:
    if not 0 <= r_e <= s.c_b:
        raise DomainError("r_e must lie in [0, C_B]")

    def score(rng, size):
        c_e = _cap(sample_eve_snr(rng, s.gamma_bar_e, s.n_e, size))
        return (s.c_b - r_e) * (c_e <= r_e)

    return run_trials(score, cfg)


def simulate_est_fixed(r: RatePair, p: ChannelParams, cfg: SimulationConfig) -> SimEstimate:
    if not 0 < r.r_e < r.r_b:
        raise DomainError("fixed-rate simulation requires 0 < r_e < r_b")

    def score(rng, size):
        c_b = _cap(sample_main_snr(rng, p.gamma_bar_b, size))
        c_e = _cap(sample_eve_snr(rng, p.gamma_bar_e, p.n_e, size))
        return (r.r_b - r.r_e) * ((c_b >= r.r_b) & (c_e <= r.r_e))

    return run_trials(score, cfg)


def simulate_annulus(r: RatePair, scheme: str, n_e, m: AnnulusModel, gamma_bar_b,
                     cfg: SimulationConfig) -> SimEstimate:
    """Two-level simulation: Eve's position first, then one fading draw.

    For ``scheme="adaptive"`` pass ``r = RatePair(C_B, r_e)``; the main
    channel never fails and ``gamma_bar_b`` is ignored.
    """
    if scheme not in ("adaptive", "fixed"):
        raise DomainError(f"unknown scheme {scheme!r}")
    if scheme == "adaptive" and not 0 <= r.r_e <= r.r_b:
        raise DomainError("r_e must lie in [0, C_B]")
    if scheme == "fixed" and not 0 < r.r_e < r.r_b:
        raise DomainError("fixed-rate simulation requires 0 < r_e < r_b")

    def score(rng, size):
        pos = sample_eve_position(rng, m, size)
        c_e = _cap(sample_eve_snr(rng, pathloss_snr(pos.rho, m), n_e, size))
        ok = c_e <= r.r_e
        if scheme == "fixed":
            ok &= _cap(sample_main_snr(rng, gamma_bar_b, size)) >= r.r_b
        return (r.r_b - r.r_e) * ok

    return run_trials(score, cfg)


def estimate_outage_probabilities(r: RatePair, p: ChannelParams, cfg: SimulationConfig):
    """Empirical ``(Pr(r_b > C_B), Pr(r_e < C_E))`` from shared fading draws."""
    if not 0 <= r.r_e <= r.r_b:
        raise DomainError("outage estimation requires 0 <= r_e <= r_b")

    def draws(rng, size):
        c_b = _cap(sample_main_snr(rng, p.gamma_bar_b, size))
        c_e = _cap(sample_eve_snr(rng, p.gamma_bar_e, p.n_e, size))
        return c_b, c_e

    rel = run_trials(lambda rng, size: r.r_b > draws(rng, size)[0], cfg)
    sec = run_trials(lambda rng, size: r.r_e < draws(rng, size)[1], cfg)
    return rel, sec
