"""Determinant concentration and least-singular-value tails.

The log-determinant is split at a cutoff eps: eigenvalues with
|lambda| >= eps contribute their logs (the cutoff functions
f+(x) = log(max(eps, x)) and f-(x) = log(max(eps, -x)) are 1/eps-Lipschitz,
which is what the spectral concentration inequality consumes), while the
small-eigenvalue product is bounded below through the least singular
value.  The experiments measure the spread of the truncated log-product
at eps = n^(-1/6) and the empirical sigma_n / condition-number tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ensembles import sample_symmetric, spectral_summary, SpectralSummary
from .laws import AtomicLaw, Law, SpacingCertificate, verify_spacing

Z95 = 1.959963984540054


class DegenerateSpectrum(Exception):
    """log of a zero eigenvalue requested."""


class SpacingUnverified(Exception):
    """No spacing certificate passes for the entry law."""


def cutoff_log(x: float, epsilon: float, sign: str = "plus") -> float:
    """f+(x) = log(max(eps, x)) or f-(x) = log(max(eps, -x)).

    Lipschitz with constant 1/eps by construction.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = float(x)
    if sign == "plus":
        return math.log(max(epsilon, x))
    if sign == "minus":
        return math.log(max(epsilon, -x))
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff eps, deviation scale delta, and the Lipschitz bound 1/eps."""

    epsilon: float
    delta: float
    lipschitz_bound: float

    def __post_init__(self):
        if self.epsilon <= 0 or self.delta <= 0:
            raise ValueError("epsilon and delta must be positive")

    @classmethod
    def for_matrix(cls, epsilon: float, delta: float, c_const: float, n: int) -> "CutoffSpec":
        """Validate delta against delta0 = 16 C sqrt(pi) |f|_L / n."""
        lip = 1.0 / epsilon
        delta0 = 16.0 * c_const * math.sqrt(math.pi) * lip / n
        if delta < delta0:
            raise ValueError(f"delta {delta} below delta0 {delta0}")
        return cls(epsilon=epsilon, delta=delta, lipschitz_bound=lip)


def spectral_window_count(summary: SpectralSummary, interval: Tuple[float, float]) -> int:
    """N_I = #{i : lambda_i in [a, b]} by binary search on the sorted spectrum."""
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        return 0
    lam = summary.eigenvalues
    lo = int(np.searchsorted(lam, a, side="left"))
    hi = int(np.searchsorted(lam, b, side="right"))
    return hi - lo


@dataclass(frozen=True)
class TruncatedLogDet:
    kept_sum: float
    dropped_count: int
    small_product_bound: float


def truncated_log_det(summary: SpectralSummary, epsilon: float) -> TruncatedLogDet:
    """Split log|det| at the cutoff.

    kept_sum runs over S_eps^- u S_eps^+ = {lambda <= -eps} u {lambda >= eps}
    (closed); dropped_count is the rest; the small product is bounded
    below by (min |lambda|)^dropped_count.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lam = summary.eigenvalues
    kept = (lam >= epsilon) | (lam <= -epsilon)
    dropped = int(np.sum(~kept))
    min_abs = float(np.min(np.abs(lam)))
    if dropped > 0 and min_abs == 0.0:
        raise DegenerateSpectrum("zero eigenvalue below the cutoff")
    kept_sum = float(np.sum(np.log(np.abs(lam[kept])))) if kept.any() else 0.0
    bound = dropped * math.log(min_abs) if dropped else 0.0
    return TruncatedLogDet(kept_sum=kept_sum, dropped_count=dropped,
                           small_product_bound=bound)


def wilson_interval(hits: int, trials: int, z: float = Z95) -> Tuple[float, float]:
    """95% Wilson score interval for a binomial frequency."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = hits / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == trials else min(1.0, center + half)
    return lo, hi


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class DetConcReport:
    n_list: Tuple[int, ...]
    trials: int
    seed: int
    rows: Tuple[tuple, ...]   # (n, trial, seed, log_abs_det, kept_sum, dropped, sigma_n, kappa)
    per_n: Dict[int, dict]
    ratio_spread: float
    fitted_exponent: Optional[float]


def detconc_trial(law: AtomicLaw, n: int, seed: int, t: int,
                  epsilon: Optional[float] = None) -> tuple:
    """One concentration row: (n, t, seed, log|det|, kept_sum, dropped, sigma_n, kappa)."""
    eps = float(epsilon) if epsilon is not None else float(n) ** (-1.0 / 6.0)
    trial_seed = _trial_seed(seed, n, t)
    s = sample_symmetric(law, None, n, seed=trial_seed, exact=False)
    summ = spectral_summary(s)
    tld = truncated_log_det(summ, eps)
    return (n, t, trial_seed, summ.log_abs_det, tld.kept_sum, tld.dropped_count,
            summ.sigma_n, summ.kappa)


def tail_trial(law: Law, F, n: int, seed: int, t: int) -> tuple:
    """One tail row: (n, t, sigma_n, kappa)."""
    s = sample_symmetric(law, F, n, seed=_trial_seed(seed, n, t), exact=False)
    summ = spectral_summary(s)
    return (n, t, summ.sigma_n, summ.kappa)


def concentration_experiment(law: AtomicLaw, n_list: Sequence[int], trials: int,
                             seed: int, epsilon: Optional[float] = None) -> DetConcReport:
    """Spread of the truncated log-determinant at eps = n^(-1/6).

    Per n and trial (keyed (seed, n, trial)): log|det|, the kept log sum,
    the dropped count, sigma_n, kappa.  The per-n summary reports the
    empirical std of the kept sum, its ratio to n^(1/3) log n, and the
    frequency of centered deviations >= 2 log n / eps.
    """
    if not isinstance(law, AtomicLaw):
        raise ValueError("a bounded atomic law is required")
    if trials < 30:
        raise ValueError("at least 30 trials required")
    rows: List[tuple] = []
    per_n: Dict[int, dict] = {}
    for n in n_list:
        eps = float(epsilon) if epsilon is not None else float(n) ** (-1.0 / 6.0)
        kept_list = np.empty(trials)
        for t in range(trials):
            row = detconc_trial(law, n, seed, t, epsilon)
            kept_list[t] = row[4]
            rows.append(row)
        std = float(kept_list.std(ddof=1))
        norm = float(n) ** (1.0 / 3.0) * math.log(n) if n > 1 else 1.0
        thr = 2.0 * math.log(n) / eps if n > 1 else 0.0
        devs = np.abs(kept_list - kept_list.mean())
        dev_freq = float(np.mean(devs >= thr)) if n > 1 else 0.0
        per_n[n] = {
            "epsilon": eps,
            "std_kept": std,
            "ratio": std / norm,
            "dev_threshold": thr,
            "dev_freq": dev_freq,
            "mean_kept": float(kept_list.mean()),
        }
    ratios = [per_n[n]["ratio"] for n in n_list]
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    fitted = None
    if len(n_list) >= 2:
        xs = np.log([float(n) for n in n_list])
        ys = np.log([max(per_n[n]["std_kept"], 1e-300) for n in n_list])
        fitted = float(np.polyfit(xs, ys, 1)[0])
    return DetConcReport(tuple(n_list), trials, seed, tuple(rows), per_n,
                         spread, fitted)


@dataclass(frozen=True)
class TailReport:
    n_list: Tuple[int, ...]
    a_exp: float
    trials: int
    seed: int
    rows: Tuple[tuple, ...]                # (n, trial, sigma_n, kappa)
    per_n: Dict[int, dict]
    loglog_slope: Optional[float]


def tail_experiment(law: Law, F, n_list: Sequence[int], a_exp: float, trials: int,
                    seed: int, cert: SpacingCertificate) -> TailReport:
    """Empirical tails of {sigma_n <= n^-A} and {kappa >= n^A}.

    The law must pass the anti-concentration spacing check for the given
    certificate; point masses and other failing laws raise
    SpacingUnverified.  Rows are keyed (seed, n, trial).
    """
    if not verify_spacing(law, cert):
        raise SpacingUnverified(
            f"law does not satisfy the spacing condition at {cert}")
    rows: List[tuple] = []
    per_n: Dict[int, dict] = {}
    for n in n_list:
        thr_sigma = float(n) ** (-float(a_exp))
        thr_kappa = float(n) ** float(a_exp)
        hits_s = hits_k = 0
        for t in range(trials):
            row = tail_trial(law, F, n, seed, t)
            rows.append(row)
            hits_s += row[2] <= thr_sigma
            hits_k += row[3] >= thr_kappa
        per_n[n] = {
            "freq_sigma": hits_s / trials,
            "ci_sigma": wilson_interval(hits_s, trials),
            "freq_kappa": hits_k / trials,
            "ci_kappa": wilson_interval(hits_k, trials),
        }
    slope = None
    pts = [(math.log(n), math.log(per_n[n]["freq_sigma"]))
           for n in n_list if per_n[n]["freq_sigma"] > 0]
    if len(pts) >= 2:
        xs, ys = zip(*pts)
        slope = float(np.polyfit(xs, ys, 1)[0])
    return TailReport(tuple(n_list), float(a_exp), trials, seed, tuple(rows),
                      per_n, slope)


def _trial_seed(seed: int, n: int, t: int) -> int:
    """Stable per-(n, trial) integer key for sample_symmetric."""
    # sample_symmetric takes one integer seed; pack the key through
    # SeedSequence-generated state to keep trials independent
    return int(np.random.SeedSequence([int(seed), int(n), int(t)]).generate_state(1)[0])
