"""Reproducible experiment runner.

Subcommands: smallball, tail, detconc, decoupling, gapreduce, rankgrow,
odlyzko, replay.  Every random outcome is a pure function of (seed,
trial index), so per-trial rows are bit-identical across reruns and any
worker count; `replay` re-executes a stored record and checks that.

Outputs: <out>.csv with one row per trial and <out>.json holding the
canonical config, its hash, rows, summary statistics and the verdict.
Exit codes: 0 pass, 2 fail, 3 inconclusive, 1 error.  A verdict is
"inconclusive" whenever a declared bound lies inside the Monte Carlo
confidence interval.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .detconc import detconc_trial, tail_trial, wilson_interval
from .ensembles import (SymmetricSample, exact_rank, grow_and_track,
                        read_matrix_text, sample_symmetric, spectral_summary,
                        subspace_membership_mc, write_matrix_text)
from .gap import beta_close, format_gap, parse_gap, rank_reduce, spans
from .laws import SpacingCertificate, auto_certificate, parse_law, verify_spacing
from .smallball import (LinearForm, QuadraticForm, bilinear_small_ball,
                        linear_small_ball_exact, linear_small_ball_mc,
                        quadratic_small_ball_exact, quadratic_small_ball_mc)
from .streams import substream
from .structure import Bipartition, decoupling_scan


class UnknownExperiment(Exception):
    pass


class InvalidConfig(Exception):
    pass


class ReplayMismatch(Exception):
    pass


EXPERIMENTS = ("smallball", "tail", "detconc", "decoupling", "gapreduce",
               "rankgrow", "odlyzko")

# fields that identify an experiment; workers/out are execution details
# and stay out of the canonical form so a replay may change them
_HASH_EXCLUDED = {"workers", "out"}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    law: str = "bernoulli"
    n: Optional[int] = None
    n_list: Optional[Tuple[int, ...]] = None
    trials: Optional[int] = None
    seed: int = 1
    workers: int = 1
    out: Optional[str] = None
    beta: Optional[float] = None
    a_exp: Optional[float] = None
    freq_bound: Optional[float] = None
    epsilon: Optional[float] = None
    spread_bound: Optional[float] = None
    dev_bound: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    form: Optional[str] = None
    coeffs: Optional[str] = None
    method: Optional[str] = None
    gap: Optional[str] = None
    values: Optional[str] = None
    steps: Optional[int] = None
    size_cap: Optional[int] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UnknownExperiment(f"unknown experiment {self.experiment!r}")
        if self.n_list is not None:
            object.__setattr__(self, "n_list", tuple(int(x) for x in self.n_list))
        if self.workers < 1:
            raise InvalidConfig("workers: must be >= 1")


_DEFAULTS: Dict[str, Dict[str, object]] = {
    "smallball": {"form": "linear", "method": "exact", "beta": 0.0, "n": 10,
                  "trials": 100000},
    "tail": {"n_list": (20, 40), "a_exp": 3.0, "freq_bound": 0.01, "trials": 200},
    "detconc": {"n_list": (20, 40, 80), "trials": 60, "spread_bound": 1.5,
                "dev_bound": 0.05},
    "decoupling": {"n": 4, "beta": 0.1, "trials": 25},
    "gapreduce": {"trials": 1},
    "rankgrow": {"n": 4, "trials": 2000},
    "odlyzko": {"n_list": (8, 12), "c3": 0.5, "trials": 20000},
}


def resolve(config: ExperimentConfig) -> Dict[str, object]:
    """Canonical config dict: experiment defaults applied, None dropped."""
    out: Dict[str, object] = {}
    for f in fields(config):
        v = getattr(config, f.name)
        if v is not None:
            out[f.name] = v
    for key, val in _DEFAULTS.get(config.experiment, {}).items():
        out.setdefault(key, val)
    if config.experiment == "tail" and not {"c1", "c2", "c3"} <= out.keys():
        law = parse_law(out["law"])
        cert = auto_certificate(law)
        if cert is not None:
            out.setdefault("c1", float(cert.c1))
            out.setdefault("c2", float(cert.c2))
            out.setdefault("c3", float(cert.c3))
    return out


def config_hash(resolved: Dict[str, object]) -> str:
    payload = {k: v for k, v in resolved.items() if k not in _HASH_EXCLUDED}
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_jsonify)
    return hashlib.sha256(canon.encode()).hexdigest()


def _jsonify(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (tuple, list)):
        return [_jsonify(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonify(v) for k, v in x.items()}
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    config: Dict[str, object]
    config_hash: str
    header: Tuple[str, ...]
    rows: Tuple[tuple, ...]
    summary: Dict[str, object]
    verdict: str
    wall_clock_s: float

    def write(self, out_base: str) -> None:
        with open(out_base + ".csv", "w") as fh:
            fh.write(",".join(self.header) + "\n")
            for row in self.rows:
                fh.write(",".join(_csv_cell(x) for x in row) + "\n")
        with open(out_base + ".json", "w") as fh:
            json.dump({
                "experiment": self.experiment,
                "config": _jsonify(self.config),
                "config_hash": self.config_hash,
                "header": list(self.header),
                "rows": _jsonify([list(r) for r in self.rows]),
                "summary": _jsonify(self.summary),
                "verdict": self.verdict,
                "wall_clock_s": self.wall_clock_s,
            }, fh, indent=1)
            fh.write("\n")


def _csv_cell(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _worst(verdicts: Sequence[str]) -> str:
    order = {"fail": 0, "inconclusive": 1, "pass": 2}
    return min(verdicts, key=lambda v: order[v]) if verdicts else "pass"


def _bound_verdict(freq: float, ci: Tuple[float, float], bound: float) -> str:
    """pass/fail/inconclusive for an upper bound on a MC frequency."""
    lo, hi = ci
    if lo <= bound <= hi:
        return "inconclusive"
    return "pass" if freq <= bound else "fail"


def _parallel(fn, items: Sequence, workers: int) -> List:
    """Deterministic map: results in item order regardless of workers."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=1))


def _derive_seed(*key: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# per-experiment runners (worker functions are module-level: picklable)


def _w_tail(args) -> List[tuple]:
    law_lit, n, seed, t0, t1 = args
    law = parse_law(law_lit)
    return [tail_trial(law, None, n, seed, t) for t in range(t0, t1)]


def _run_tail(cfg: Dict[str, object]):
    law = parse_law(cfg["law"])
    cert = SpacingCertificate(cfg["c1"], cfg["c2"], cfg["c3"]) \
        if {"c1", "c2", "c3"} <= cfg.keys() else None
    if cert is None or not verify_spacing(law, cert):
        from .detconc import SpacingUnverified
        raise SpacingUnverified("no spacing certificate passes for this law")
    trials = int(cfg["trials"])
    items = []
    step = max(1, trials // 8)
    for n in cfg["n_list"]:
        for t0 in range(0, trials, step):
            items.append((cfg["law"], n, cfg["seed"], t0, min(t0 + step, trials)))
    chunks = _parallel(_w_tail, items, int(cfg.get("workers", 1)))
    rows = [row for chunk in chunks for row in chunk]
    header = ("n", "trial", "sigma_n", "kappa")
    summary: Dict[str, object] = {"per_n": {}}
    verdicts = []
    for n in cfg["n_list"]:
        thr_s = float(n) ** -float(cfg["a_exp"])
        thr_k = float(n) ** float(cfg["a_exp"])
        sub = [r for r in rows if r[0] == n]
        hs = sum(1 for r in sub if r[2] <= thr_s)
        hk = sum(1 for r in sub if r[3] >= thr_k)
        ci_s = wilson_interval(hs, trials)
        v = _bound_verdict(hs / trials, ci_s, float(cfg["freq_bound"]))
        verdicts.append(v)
        summary["per_n"][n] = {
            "freq_sigma": hs / trials, "ci_sigma": ci_s,
            "freq_kappa": hk / trials, "ci_kappa": wilson_interval(hk, trials),
            "verdict": v,
        }
    return header, rows, summary, _worst(verdicts)


def _w_detconc(args) -> List[tuple]:
    law_lit, n, seed, t0, t1, eps = args
    law = parse_law(law_lit)
    return [detconc_trial(law, n, seed, t, eps) for t in range(t0, t1)]


def _run_detconc(cfg: Dict[str, object]):
    trials = int(cfg["trials"])
    if trials < 30:
        raise InvalidConfig("trials: at least 30 required")
    eps_over = cfg.get("epsilon")
    items = []
    step = max(1, trials // 8)
    for n in cfg["n_list"]:
        for t0 in range(0, trials, step):
            items.append((cfg["law"], n, cfg["seed"], t0, min(t0 + step, trials), eps_over))
    chunks = _parallel(_w_detconc, items, int(cfg.get("workers", 1)))
    rows = [row for chunk in chunks for row in chunk]
    header = ("n", "trial", "seed", "log_abs_det", "kept_sum",
              "dropped_count", "sigma_n", "kappa")
    summary: Dict[str, object] = {"per_n": {}}
    ratios = []
    verdicts = []
    for n in cfg["n_list"]:
        eps = float(eps_over) if eps_over is not None else float(n) ** (-1 / 6)
        kept = np.array([r[4] for r in rows if r[0] == n])
        std = float(kept.std(ddof=1))
        norm = float(n) ** (1 / 3) * math.log(n)
        thr = 2 * math.log(n) / eps
        dev_hits = int(np.sum(np.abs(kept - kept.mean()) >= thr))
        ci = wilson_interval(dev_hits, trials)
        v = _bound_verdict(dev_hits / trials, ci, float(cfg["dev_bound"]))
        verdicts.append(v)
        ratios.append(std / norm)
        summary["per_n"][n] = {
            "epsilon": eps, "std_kept": std, "ratio": std / norm,
            "dev_threshold": thr, "dev_freq": dev_hits / trials,
            "dev_verdict": v,
        }
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    summary["ratio_spread"] = spread
    summary["spread_bound"] = float(cfg["spread_bound"])
    verdicts.append("pass" if spread <= float(cfg["spread_bound"]) else "fail")
    return header, rows, summary, _worst(verdicts)


def _w_decoupling(args) -> tuple:
    law_lit, n, beta, seed, t = args
    law = parse_law(law_lit)
    rng = substream(seed, t)
    while True:
        num = rng.integers(-3, 4, size=(n, n))
        mat = np.triu(num, 1)
        mat = mat + mat.T
        if np.any(mat):
            break
    form = QuadraticForm(tuple(tuple(Fraction(int(x), 4) for x in row) for row in mat))
    u = Bipartition(tuple(bool(b) for b in rng.random(n) < 0.5))
    const, checks = decoupling_scan(form, law, beta, u)
    last = checks[-1]
    return (t, float(last.rho_quad), last.lhs, const if const is not None else -1.0,
            float(last.rhs), const is not None)


def _run_decoupling(cfg: Dict[str, object]):
    items = [(cfg["law"], int(cfg["n"]), float(cfg["beta"]), cfg["seed"], t)
             for t in range(int(cfg["trials"]))]
    rows = _parallel(_w_decoupling, items, int(cfg.get("workers", 1)))
    header = ("trial", "rho_quad", "lhs", "radius_constant", "rhs", "holds")
    ok = all(r[5] for r in rows)
    summary = {
        "holds_all": ok,
        "max_constant_needed": max((r[3] for r in rows), default=0),
    }
    return header, rows, summary, "pass" if ok else "fail"


def _run_gapreduce(cfg: Dict[str, object]):
    if "gap" not in cfg or "values" not in cfg:
        raise InvalidConfig("gap, values: both required for gapreduce")
    q = parse_gap(cfg["gap"])
    vals = [Fraction(tok) for tok in str(cfg["values"]).split(",") if tok.strip()]
    red = rank_reduce(q, vals)
    rows = []
    ok = True
    for v, w in zip(vals, red.witnesses):
        contained = beta_close(red.gap, v, 0) is not None
        ok = ok and contained
        rows.append((f"{v.numerator}/{v.denominator}", json.dumps(list(w)), contained))
    ok = ok and red.gap.rank <= q.rank and spans(red.gap, red.witnesses)
    header = ("value", "witness", "contained")
    summary = {
        "input_gap": format_gap(q),
        "output_gap": format_gap(red.gap),
        "rank": red.gap.rank,
        "inflation": red.inflation,
        "steps": len(red.steps),
    }
    return header, rows, summary, "pass" if ok else "fail"


def _w_rankgrow(args) -> List[tuple]:
    law_lit, n, seed, t = args
    law = parse_law(law_lit)
    zero = _zero_sample(n)
    steps = grow_and_track(zero, law, n - 1, seed=_derive_seed(seed, t))
    return [(t, i + 1, st.size, st.new_rank, st.jumped_by_2)
            for i, st in enumerate(steps)]


def _zero_sample(n: int) -> SymmetricSample:
    z = np.zeros((n, n))
    exact = tuple(tuple(0 for _ in range(n)) for _ in range(n))
    return SymmetricSample(n=n, fixed=z, noise=z, matrix=z, exact=exact,
                           gamma=1.0, seed=0)


def _run_rankgrow(cfg: Dict[str, object]):
    law = parse_law(cfg["law"])
    cert = auto_certificate(law)
    if cert is None:
        raise InvalidConfig("law: needs a spacing certificate for the growth bound")
    n = int(cfg["n"])
    trials = int(cfg["trials"])
    items = [(cfg["law"], n, cfg["seed"], t) for t in range(trials)]
    chunks = _parallel(_w_rankgrow, items, int(cfg.get("workers", 1)))
    rows = [row for chunk in chunks for row in chunk]
    header = ("trial", "step", "size", "new_rank", "jumped_by_2")
    jump1 = sum(1 for r in rows if r[1] == 1 and r[4]) / trials
    target_rank = 2 * n - 2
    chain = sum(1 for r in rows if r[2] == 2 * n - 1 and r[3] == target_rank) / trials
    bound1 = 1 - math.sqrt(1 - float(cert.c3)) ** n
    se1 = math.sqrt(max(jump1 * (1 - jump1), 1e-12) / trials)
    v1 = "pass" if jump1 >= bound1 - 3 * se1 else "fail"
    ci_chain = wilson_interval(int(round(chain * trials)), trials)
    v2 = "fail" if ci_chain[1] < 0.5 else ("pass" if chain >= 0.5 else "inconclusive")
    summary = {
        "jump1_freq": jump1, "jump1_bound": bound1, "jump1_se": se1,
        "chain_freq": chain, "chain_target_rank": target_rank,
        "verdict_jump1": v1, "verdict_chain": v2,
    }
    return header, rows, summary, _worst([v1, v2])


def _w_odlyzko(args) -> tuple:
    law_lit, n, k, trials, seed, c3 = args
    law = parse_law(law_lit)
    res = subspace_membership_mc(law, n, k, trials, seed=_derive_seed(seed, n, k), c3=c3)
    return (n, k, res.freq, res.se, res.bound)


def _run_odlyzko(cfg: Dict[str, object]):
    trials = int(cfg["trials"])
    c3 = float(cfg["c3"])
    items = [(cfg["law"], n, k, trials, cfg["seed"], c3)
             for n in cfg["n_list"] for k in range(1, n)]
    rows = _parallel(_w_odlyzko, items, int(cfg.get("workers", 1)))
    header = ("n", "k", "freq", "se", "bound")
    ok = all(r[2] <= r[4] + 3 * r[3] for r in rows)
    worst = max(((r[2] - r[4]) / r[3] if r[3] > 0 else -math.inf) for r in rows)
    summary = {"holds_all": ok, "worst_excess_se": worst}
    return header, rows, summary, "pass" if ok else "fail"


def _read_coeffs(path: Optional[str], kind: str, n: int):
    if path is None:
        if kind == "linear":
            return [Fraction(1)] * n
        return [[Fraction(1, 2) if i != j else Fraction(0) for j in range(2)]
                for i in range(2)]
    from .ensembles import read_matrix_exact
    rows = read_matrix_exact(path)
    if kind == "linear":
        return [x for row in rows for x in row]
    return rows


def _run_smallball(cfg: Dict[str, object]):
    law = parse_law(cfg["law"])
    kind = cfg["form"]
    method = cfg["method"]
    beta = float(cfg["beta"])
    trials = int(cfg["trials"])
    seed = int(cfg["seed"])
    coeffs = _read_coeffs(cfg.get("coeffs"), kind, int(cfg.get("n", 10)))
    if kind == "linear":
        form = LinearForm(tuple(coeffs))
        est = linear_small_ball_exact(form, law, beta) if method == "exact" \
            else linear_small_ball_mc(form, law, beta, trials, seed)
    elif kind == "quadratic":
        form = QuadraticForm(tuple(tuple(r) for r in coeffs))
        est = quadratic_small_ball_exact(form, law, beta) if method == "exact" \
            else quadratic_small_ball_mc(form, law, beta, trials, seed)
    elif kind == "bilinear":
        form = QuadraticForm(tuple(tuple(r) for r in coeffs))
        est = bilinear_small_ball(form, law, law, beta, method=method,
                                  trials=trials, seed=seed)
    else:
        raise InvalidConfig(f"form: unknown kind {kind!r}")
    header = ("form", "method", "rho", "beta", "ci", "witness_center")
    rows = [(kind, est.method, est.rho, est.beta, est.ci_halfwidth, est.witness_center)]
    summary = {
        "rho": est.rho, "beta": est.beta, "method": est.method,
        "ci": est.ci_halfwidth, "witness_center": est.witness_center,
    }
    return header, rows, summary, "pass"


_RUNNERS = {
    "smallball": _run_smallball,
    "tail": _run_tail,
    "detconc": _run_detconc,
    "decoupling": _run_decoupling,
    "gapreduce": _run_gapreduce,
    "rankgrow": _run_rankgrow,
    "odlyzko": _run_odlyzko,
}


def run(config: ExperimentConfig) -> ResultRecord:
    """Dispatch to the named experiment; write CSV + JSON; return the record."""
    resolved = resolve(config)
    runner = _RUNNERS.get(config.experiment)
    if runner is None:
        raise UnknownExperiment(config.experiment)
    t0 = time.monotonic()
    header, rows, summary, verdict = runner(resolved)
    wall = time.monotonic() - t0
    rec = ResultRecord(
        experiment=config.experiment,
        config={k: v for k, v in resolved.items() if k not in _HASH_EXCLUDED},
        config_hash=config_hash(resolved),
        header=tuple(header),
        rows=tuple(tuple(r) for r in rows),
        summary=summary,
        verdict=verdict,
        wall_clock_s=wall,
    )
    out_base = resolved.get("out") or f"randsym_{config.experiment}"
    rec.write(str(out_base))
    return rec


def replay(record_path: str, workers: Optional[int] = None) -> ResultRecord:
    """Re-run a stored record's config and demand bit-identical rows."""
    with open(record_path) as fh:
        stored = json.load(fh)
    cfg_dict = dict(stored["config"])
    cfg_dict.pop("out", None)
    cfg_dict.pop("workers", None)
    if "n_list" in cfg_dict:
        cfg_dict["n_list"] = tuple(cfg_dict["n_list"])
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(cfg_dict) - known
    if unknown:
        raise InvalidConfig(f"record has unknown fields: {sorted(unknown)}")
    cfg = ExperimentConfig(out=record_path + ".replay",
                           workers=workers or 1, **cfg_dict)
    rec = run(cfg)
    old_rows = stored["rows"]
    new_rows = _jsonify([list(r) for r in rec.rows])
    if len(old_rows) != len(new_rows):
        raise ReplayMismatch(f"row count changed: {len(old_rows)} -> {len(new_rows)}")
    for i, (a, b) in enumerate(zip(old_rows, new_rows)):
        if a != b:
            raise ReplayMismatch(f"first differing row {i}: {a} != {b}")
    return rec


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidConfig(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="randsym", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="experiment", required=True)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--config", type=str, default=None)
    common.add_argument("--law", type=str, default=None)

    sp = sub.add_parser("smallball", parents=[common])
    sp.add_argument("--form", choices=("linear", "quadratic", "bilinear"), default=None)
    sp.add_argument("--coeffs", type=str, default=None)
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--method", choices=("exact", "mc"), default=None)
    sp.add_argument("--n", type=int, default=None)

    tp = sub.add_parser("tail", parents=[common])
    tp.add_argument("--n-list", dest="n_list", type=str, default=None)
    tp.add_argument("--a-exp", dest="a_exp", type=float, default=None)
    tp.add_argument("--freq-bound", dest="freq_bound", type=float, default=None)
    for c in ("c1", "c2", "c3"):
        tp.add_argument(f"--{c}", type=float, default=None)

    dp = sub.add_parser("detconc", parents=[common])
    dp.add_argument("--n-list", dest="n_list", type=str, default=None)
    dp.add_argument("--epsilon", type=float, default=None)
    dp.add_argument("--spread-bound", dest="spread_bound", type=float, default=None)
    dp.add_argument("--dev-bound", dest="dev_bound", type=float, default=None)

    cp = sub.add_parser("decoupling", parents=[common])
    cp.add_argument("--n", type=int, default=None)
    cp.add_argument("--beta", type=float, default=None)

    gp = sub.add_parser("gapreduce", parents=[common])
    gp.add_argument("--gap", type=str, default=None)
    gp.add_argument("--values", type=str, default=None)

    rp = sub.add_parser("rankgrow", parents=[common])
    rp.add_argument("--n", type=int, default=None)

    op = sub.add_parser("odlyzko", parents=[common])
    op.add_argument("--n-list", dest="n_list", type=str, default=None)
    op.add_argument("--c3", type=float, default=None)

    rpl = sub.add_parser("replay")
    rpl.add_argument("record", type=str)
    rpl.add_argument("--workers", type=int, default=None)

    en = sub.add_parser("ensemble")
    en.add_argument("action", choices=("sample", "spectrum", "rank", "grow"))
    en.add_argument("--n", type=int, default=4)
    en.add_argument("--law", type=str, default="bernoulli")
    en.add_argument("--F", dest="fixed", type=str, default=None)
    en.add_argument("--seed", type=int, default=1)
    en.add_argument("--trials", type=int, default=1)
    en.add_argument("--out", type=str, default=None)
    return p


def _run_ensemble_action(args) -> int:
    """Matrix utilities: sample | spectrum | rank | grow."""
    law = parse_law(args.law)
    fixed = read_matrix_text(args.fixed) if args.fixed else None
    if args.action == "grow":
        zero = _zero_sample(args.n)
        for t in range(args.trials):
            steps = grow_and_track(zero, law, args.n - 1,
                                   seed=_derive_seed(args.seed, t))
            line = " ".join(f"{st.size}:{st.new_rank}" for st in steps)
            print(f"trial {t}: {line}")
        return 0
    for t in range(args.trials):
        s = sample_symmetric(law, fixed, args.n, seed=_derive_seed(args.seed, t))
        if args.action == "sample":
            if args.out:
                write_matrix_text(s.matrix, f"{args.out}.{t}.txt" if args.trials > 1
                                  else args.out + ".txt")
            else:
                for row in s.matrix:
                    print(" ".join(repr(float(x)) for x in row))
        elif args.action == "spectrum":
            summ = spectral_summary(s)
            print(json.dumps({
                "trial": t, "sigma_1": summ.sigma_1, "sigma_n": summ.sigma_n,
                "kappa": summ.kappa, "log_abs_det": summ.log_abs_det,
                "eigenvalues": [float(x) for x in summ.eigenvalues],
            }))
        elif args.action == "rank":
            print(f"trial {t}: rank {exact_rank(s)}")
    return 0


def _load_config_file(path: str) -> Dict[str, object]:
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    out: Dict[str, object] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = _coerce(key.strip(), val.strip())
    return out


def _coerce(key: str, val: str):
    if key in ("n", "trials", "seed", "workers", "steps", "size_cap"):
        return int(val)
    if key in ("beta", "a_exp", "freq_bound", "epsilon", "spread_bound",
               "dev_bound", "c1", "c2", "c3"):
        return float(val)
    if key == "n_list":
        return tuple(int(tok) for tok in val.split(",") if tok.strip())
    return val


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.experiment == "replay":
            rec = replay(args.record, workers=args.workers)
            print(f"replay ok: {len(rec.rows)} rows identical "
                  f"(config {rec.config_hash[:12]})")
            return 0
        if args.experiment == "ensemble":
            return _run_ensemble_action(args)
        base: Dict[str, object] = {}
        if getattr(args, "config", None):
            base.update(_load_config_file(args.config))
        for key, val in vars(args).items():
            if key == "config" or val is None:
                continue
            if key == "n_list" and isinstance(val, str):
                val = tuple(int(tok) for tok in val.split(",") if tok.strip())
            base[key] = val
        cfg = ExperimentConfig(**base)
        rec = run(cfg)
        print(f"{rec.experiment}: verdict={rec.verdict} rows={len(rec.rows)} "
              f"hash={rec.config_hash[:12]} wall={rec.wall_clock_s:.2f}s")
        for key, val in rec.summary.items():
            print(f"  {key}: {_jsonify(val)}")
        return {"pass": 0, "fail": 2, "inconclusive": 3}[rec.verdict]
    except (InvalidConfig, UnknownExperiment) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ReplayMismatch as e:
        print(f"replay mismatch: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # pragma: no cover - surfaced, not masked
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
