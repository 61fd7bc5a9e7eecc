"""Command-line front end: ``est-opt {evaluate,optimize,sweep,simulate}``.

SNR flags are in dB, rates in bits per channel use, radii in units of the
reference distance.  Exit codes: 0 ok, 1 I/O failure, 2 usage, 3 domain
error, 4 non-convergence or infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import adaptive, annulus, fixed, montecarlo
from .core import ChannelParams, RatePair, SolverConfig, capacity
from .errors import DomainError, EstError
from .special import db_to_linear

SCHEMES = ("adaptive", "fixed", "annulus-adaptive", "annulus-fixed")
CSV_COLUMNS = ("param", "gamma_b_db", "gamma_e_db", "ne", "r_b", "r_e", "est",
               "rel_outage", "sec_outage", "residual", "classification")
SWEEP_PARAMS = ("gamma_b_db", "gamma_e_db", "ne", "rho_i", "rho_o")

class UsageError(Exception):
    pass


@dataclass
class SweepSpec:
    param: str
    start: float
    stop: float
    step: float
    bindings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise UsageError(f"cannot sweep {self.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
        if not self.step > 0:
            raise UsageError("sweep step must be positive")
        if not self.start < self.stop:
            raise UsageError("empty sweep range: start must be below stop")

    def values(self):
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(n)]


# ---------------------------------------------------------------------------
# argument handling


def _solver_cfg(a):
    return SolverConfig(tolerance=a.tol, max_iter=a.max_iter, damping=a.damping)


def _require(a, *names):
    missing = [n for n in names if getattr(a, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"scheme {a.scheme} requires {flags}")


def _model(a):
    _require(a, "gamma0_db", "rho_i", "rho_o")
    return annulus.AnnulusModel(a.rho_i, a.rho_o, db_to_linear(a.gamma0_db), a.rho_r, a.eta)


def _inputs(a):
    keys = ("scheme", "gamma_b_db", "gamma_e_db", "ne", "re", "rb")
    if a.scheme.startswith("annulus"):
        keys += ("gamma0_db", "rho_i", "rho_o", "rho_r", "eta")
    return {k: getattr(a, k) for k in keys if getattr(a, k, None) is not None}


def _check_common(a):
    _require(a, "gamma_b_db", "ne")
    if a.scheme in ("adaptive", "fixed"):
        _require(a, "gamma_e_db")


# ---------------------------------------------------------------------------
# record builders: each returns a flat dict keyed like CSV_COLUMNS


def _row(a, **kw):
    row = dict.fromkeys(CSV_COLUMNS)
    row.update(gamma_b_db=a.gamma_b_db, ne=a.ne)
    if a.scheme in ("adaptive", "fixed"):
        row["gamma_e_db"] = a.gamma_e_db
    row.update(kw)
    return row


def evaluate_record(a):
    _check_common(a)
    gb = db_to_linear(a.gamma_b_db)
    if a.scheme == "adaptive":
        _require(a, "re")
        s = adaptive.AdaptiveScenario.from_snr(gb, db_to_linear(a.gamma_e_db), a.ne)
        return _row(a, r_b=s.c_b, r_e=a.re, est=adaptive.est_adaptive(a.re, s), rel_outage=0.0,
                    sec_outage=adaptive.secrecy_outage_adaptive(a.re, s))
    if a.scheme == "fixed":
        _require(a, "rb", "re")
        p = ChannelParams(gb, db_to_linear(a.gamma_e_db), a.ne)
        r = RatePair(a.rb, a.re)
        return _row(a, r_b=a.rb, r_e=a.re, est=fixed.est_fixed(r, p),
                    rel_outage=fixed.reliability_outage_fixed(a.rb, gb),
                    sec_outage=fixed.secrecy_outage_fixed(a.re, p.gamma_bar_e, a.ne))
    m = _model(a)
    _require(a, "re")
    sec = 1.0 - annulus.annulus_secure_probability(a.re, a.ne, m)
    if a.scheme == "annulus-adaptive":
        c_b = capacity(gb)
        return _row(a, r_b=c_b, r_e=a.re, est=annulus.avg_est_adaptive_annulus(a.re, c_b, a.ne, m),
                    rel_outage=0.0, sec_outage=sec)
    _require(a, "rb")
    return _row(a, r_b=a.rb, r_e=a.re,
                est=annulus.avg_est_fixed_annulus(RatePair(a.rb, a.re), gb, a.ne, m),
                rel_outage=fixed.reliability_outage_fixed(a.rb, gb), sec_outage=sec)


def optimize_record(a):
    """Optimized rates plus the solver diagnostics; ``report`` holds the full SolverReport."""
    _check_common(a)
    cfg = _solver_cfg(a)
    gb = db_to_linear(a.gamma_b_db)
    extra = {}
    if a.scheme == "adaptive":
        s = adaptive.AdaptiveScenario.from_snr(gb, db_to_linear(a.gamma_e_db), a.ne)
        rep = adaptive.solve_redundancy_rate(s, cfg)
        rel, sec = 0.0, adaptive.secrecy_outage_adaptive(rep.r_e, s)
        if getattr(a, "average", False):
            extra["avg_est"] = adaptive.average_max_est_adaptive(gb, s.gamma_bar_e, a.ne, cfg)
    elif a.scheme == "fixed":
        p = ChannelParams(gb, db_to_linear(a.gamma_e_db), a.ne)
        rep = fixed.solve_rate_pair(p, cfg)
        rel = fixed.reliability_outage_fixed(rep.r_b, gb)
        sec = fixed.secrecy_outage_fixed(rep.r_e, p.gamma_bar_e, a.ne)
    else:
        m = _model(a)
        if a.scheme == "annulus-adaptive":
            rep = annulus.optimize_annulus_adaptive(capacity(gb), a.ne, m, cfg)
            rel = 0.0
        else:
            rep = annulus.optimize_annulus_fixed(gb, a.ne, m, cfg)
            rel = fixed.reliability_outage_fixed(rep.r_b, gb)
        sec = 1.0 - annulus.annulus_secure_probability(rep.r_e, a.ne, m)
    row = _row(a, r_b=rep.r_b, r_e=rep.r_e, est=rep.est, rel_outage=rel, sec_outage=sec,
               residual=rep.residual, classification=rep.classification.value)
    row["report"] = rep.to_dict()
    row.update(extra)
    return row


def simulate_record(a):
    _check_common(a)
    cfg = montecarlo.SimulationConfig(trials=a.trials, seed=a.seed, stream_id=a.stream_id,
                                      workers=_threads())
    gb = db_to_linear(a.gamma_b_db)
    if a.scheme == "adaptive":
        _require(a, "re")
        s = adaptive.AdaptiveScenario.from_snr(gb, db_to_linear(a.gamma_e_db), a.ne)
        est = montecarlo.simulate_est_adaptive(a.re, s, cfg)
    elif a.scheme == "fixed":
        _require(a, "rb", "re")
        p = ChannelParams(gb, db_to_linear(a.gamma_e_db), a.ne)
        est = montecarlo.simulate_est_fixed(RatePair(a.rb, a.re), p, cfg)
    elif a.scheme == "annulus-adaptive":
        _require(a, "re")
        est = montecarlo.simulate_annulus(RatePair(capacity(gb), a.re), "adaptive", a.ne,
                                          _model(a), None, cfg)
    else:
        _require(a, "rb", "re")
        est = montecarlo.simulate_annulus(RatePair(a.rb, a.re), "fixed", a.ne, _model(a), gb, cfg)
    return est.to_dict()


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _csv_text(rows, columns=CSV_COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _json_text(obj):
    return json.dumps(obj, default=_json_default, allow_nan=True) + "\n"


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror}") from exc


def _single(a, record):
    if a.csv:
        return _csv_text([record])
    skip = ("param", "gamma_b_db", "gamma_e_db", "ne")
    rec = {"inputs": _inputs(a)}
    rec.update((k, v) for k, v in record.items() if k not in skip and v is not None)
    return _json_text(rec)


def _threads():
    try:
        return max(1, int(os.environ.get("EST_OPT_THREADS", "1")))
    except ValueError:
        return 1


def sweep_rows(a):
    spec = SweepSpec(a.param, a.start, a.stop, a.step)
    points = []
    for ne in a.ne:
        for ge in a.gamma_e_db or [None]:
            for v in spec.values():
                pa = argparse.Namespace(**vars(a))
                pa.ne, pa.gamma_e_db = ne, ge
                if spec.param == "ne":
                    if v != int(v):
                        raise UsageError("antenna-count sweeps need integer start and step")
                    v = int(v)
                setattr(pa, spec.param, v)
                points.append((v, pa))
    build = optimize_record if a.mode == "optimize" else evaluate_record

    def one(item):
        v, pa = item
        row = build(pa)
        row["param"] = v
        return row

    workers = _threads()
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, points))
    return [one(p) for p in points]


# ---------------------------------------------------------------------------
# parser


def _add_model_args(p, multi=False):
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--gamma-b-db", type=float,
                   help="main-channel SNR in dB (instantaneous for adaptive schemes, average for fixed)")
    if multi:
        p.add_argument("--gamma-e-db", type=float, nargs="+", help="eavesdropper average SNR(s) in dB")
        p.add_argument("--ne", type=int, nargs="+", help="eavesdropper antenna count(s)")
    else:
        p.add_argument("--gamma-e-db", type=float, help="eavesdropper average SNR in dB")
        p.add_argument("--ne", type=int, help="eavesdropper antenna count")
    p.add_argument("--gamma0-db", type=float, help="annulus reference SNR in dB")
    p.add_argument("--rho-i", type=float, help="annulus inner radius")
    p.add_argument("--rho-o", type=float, help="annulus outer radius")
    p.add_argument("--rho-r", type=float, default=1.0, help="reference distance")
    p.add_argument("--eta", type=float, default=3.0, help="path-loss exponent")


def _add_solver_args(p):
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--damping", type=float, default=0.5)


def _add_output_args(p, allow_csv=True):
    p.add_argument("--out", help="write to PATH instead of stdout")
    if allow_csv:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--json", action="store_true", help="JSON output (default)")
        g.add_argument("--csv", action="store_true", help="CSV output")


def build_parser():
    ap = argparse.ArgumentParser(prog="est-opt", description="Effective secrecy throughput toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate the EST at given rates")
    _add_model_args(ev)
    ev.add_argument("--re", type=float, help="redundancy rate")
    ev.add_argument("--rb", type=float, help="codeword rate (fixed-rate schemes)")
    _add_output_args(ev)

    op = sub.add_parser("optimize", help="optimize the code rates")
    _add_model_args(op)
    _add_solver_args(op)
    op.add_argument("--average", action="store_true",
                    help="adaptive only: also average the optimized EST over main-channel fading")
    _add_output_args(op)

    sw = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    _add_model_args(sw, multi=True)
    _add_solver_args(sw)
    sw.add_argument("--re", type=float)
    sw.add_argument("--rb", type=float)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--step", type=float, required=True)
    sw.add_argument("--mode", choices=("optimize", "evaluate"), default="optimize")
    sw.add_argument("--out", help="write CSV to PATH instead of stdout")

    si = sub.add_parser("simulate", help="Monte Carlo estimate of the EST")
    _add_model_args(si)
    si.add_argument("--re", type=float)
    si.add_argument("--rb", type=float)
    si.add_argument("--trials", type=int, default=1_000_000)
    si.add_argument("--seed", type=int, default=0)
    si.add_argument("--stream-id", type=int, default=0)
    _add_output_args(si)
    return ap


def render(a) -> str:
    """Rendered output text for parsed arguments ``a`` (raises on errors)."""
    if a.command == "evaluate":
        return _single(a, evaluate_record(a))
    if a.command == "optimize":
        return _single(a, optimize_record(a))
    if a.command == "simulate":
        rec = simulate_record(a)
        if a.csv:
            return _csv_text([rec], ("mean", "std_error", "trials", "seed", "stream_id"))
        return _json_text({"inputs": _inputs(a), **rec})
    if a.ne is None:
        raise UsageError("--ne is required")
    return _csv_text(sweep_rows(a))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="est-opt: %(levelname)s: %(message)s")
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _emit(render(a), a.out)
    except UsageError as exc:
        print(f"est-opt: usage error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"est-opt: domain error: {exc}", file=sys.stderr)
        return 3
    except EstError as exc:
        print(f"est-opt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"est-opt: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
