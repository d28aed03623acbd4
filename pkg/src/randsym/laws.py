"""Entry laws for random symmetric matrices.

Finitely supported laws are kept exact: atom values and masses are
fractions.Fraction whenever the inputs are rational (floats are accepted
and treated as the exact binary rationals they are).  Derived laws
(xi - xi', the lazy symmetrization eta^(mu) * (xi - xi')) and the
anti-concentration spacing check are computed by exact convolution.

Continuous laws are represented as samplers plus a closed-form (or
quadrature) mass function for |xi - xi'|; their spacing check carries a
documented 1e-9 absolute tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .streams import chunk_bounds, substream

Scalar = Union[Fraction, float]

MERGE_REL_TOL = 1e-12
MASS_TOL = 1e-12
RETRY_CAP = 10 ** 6


class DegenerateLaw(Exception):
    """Law has zero variance where a spread is required."""


class RejectionDiverges(Exception):
    """Truncated rejection sampling cannot produce an in-bound draw."""


def _as_scalar(x) -> Scalar:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)


def _values_close(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= MERGE_REL_TOL * max(1.0, abs(fa), abs(fb))


def _canonical_atoms(pairs) -> Tuple[Tuple[Scalar, Scalar], ...]:
    cleaned = []
    for v, p in pairs:
        v, p = _as_scalar(v), _as_scalar(p)
        if p < 0:
            raise ValueError(f"negative mass {p} at atom {v}")
        if p == 0:
            continue
        cleaned.append((v, p))
    if not cleaned:
        raise ValueError("law needs at least one atom of positive mass")
    cleaned.sort(key=lambda a: float(a[0]))
    merged: List[Tuple[Scalar, Scalar]] = []
    for v, p in cleaned:
        if merged and _values_close(merged[-1][0], v):
            v0, p0 = merged[-1]
            merged[-1] = (v0, p0 + p)
        else:
            merged.append((v, p))
    total = sum(p for _, p in merged)
    if abs(float(total) - 1.0) > MASS_TOL:
        raise ValueError(f"masses sum to {float(total)}, not 1")
    return tuple(merged)


@dataclass(frozen=True)
class AtomicLaw:
    """A finitely supported probability law, canonically ordered."""

    atoms: Tuple[Tuple[Scalar, Scalar], ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canonical_atoms(self.atoms))

    @property
    def values(self) -> Tuple[Scalar, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def masses(self) -> Tuple[Scalar, ...]:
        return tuple(p for _, p in self.atoms)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, Fraction) and isinstance(p, Fraction)
                   for v, p in self.atoms)

    @property
    def mean(self) -> Scalar:
        return sum(v * p for v, p in self.atoms)

    @property
    def variance(self) -> Scalar:
        m = self.mean
        return sum((v - m) * (v - m) * p for v, p in self.atoms)

    @property
    def max_atom_mass(self) -> Scalar:
        return max(self.masses)

    @property
    def support_radius(self) -> Scalar:
        return max(abs(v) for v in self.values)

    def values_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=np.float64)

    def cum_masses(self) -> np.ndarray:
        c = np.cumsum(np.array([float(p) for p in self.masses], dtype=np.float64))
        c[-1] = 1.0
        return c

    def sample_indices(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        return np.searchsorted(self.cum_masses(), u, side="right").clip(0, len(self.atoms) - 1)

    def sample_values(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.values_float()[self.sample_indices(rng, size)]


@dataclass(frozen=True)
class ContinuousLaw:
    """A continuous law: a sampler plus the mass function of |xi - xi'|."""

    label: str
    sample: Callable[[np.random.Generator, object], np.ndarray]
    diff_interval_mass: Optional[Callable[[float, float], float]] = None
    mean: float = 0.0
    variance: float = 1.0

    is_rational = False

    def sample_values(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.sample(rng, size)


Law = Union[AtomicLaw, ContinuousLaw]


@dataclass(frozen=True)
class SpacingCertificate:
    """Witness (c1, c2, c3) for P(c1 <= |xi - xi'| <= c2) >= c3."""

    c1: Scalar
    c2: Scalar
    c3: Scalar

    def __post_init__(self):
        object.__setattr__(self, "c1", _as_scalar(self.c1))
        object.__setattr__(self, "c2", _as_scalar(self.c2))
        object.__setattr__(self, "c3", _as_scalar(self.c3))
        if not (0 < self.c1 <= self.c2):
            raise ValueError("need 0 < c1 <= c2")
        if not (0 < self.c3 <= 1):
            raise ValueError("need 0 < c3 <= 1")


@dataclass(frozen=True)
class SamplerConfig:
    """Seeded truncated-sampling configuration (exponent B, size n)."""

    seed: int
    truncation_exponent: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not math.isfinite(self.bound) or self.bound <= 0:
            raise ValueError("truncation bound n^(B+1) must be finite and positive")

    @property
    def bound(self) -> float:
        return float(self.n) ** (float(self.truncation_exponent) + 1.0)


# ---------------------------------------------------------------------------
# presets and the config-file law literals


def bernoulli() -> AtomicLaw:
    return AtomicLaw(((-1, Fraction(1, 2)), (1, Fraction(1, 2))), label="bernoulli")


def uniform3() -> AtomicLaw:
    third = Fraction(1, 3)
    return AtomicLaw(((-1, third), (0, third), (1, third)), label="uniform3")


def lazy_sign(mu) -> AtomicLaw:
    """eta^(mu): +-1 with mass mu/2 each, 0 with mass 1 - mu."""
    mu = _as_scalar(mu)
    if not (0 <= mu <= 1):
        raise ValueError("mu must lie in [0, 1]")
    return AtomicLaw(((-1, mu / 2), (0, 1 - mu), (1, mu / 2)), label=f"lazy({float(mu)})")


def point_mass(v=0) -> AtomicLaw:
    return AtomicLaw(((v, Fraction(1)),), label=f"point({v})")


def gaussian() -> ContinuousLaw:
    def _mass(c1: float, c2: float) -> float:
        # xi - xi' ~ N(0, 2); P(c1 <= |D| <= c2) = erf(c2/2) - erf(c1/2)
        return math.erf(c2 / 2.0) - math.erf(c1 / 2.0)

    return ContinuousLaw(
        label="gaussian",
        sample=lambda rng, size: rng.standard_normal(size),
        diff_interval_mass=_mass,
    )


def uniform_continuous() -> ContinuousLaw:
    h = math.sqrt(3.0)  # U(-sqrt3, sqrt3): zero mean, unit variance

    def _mass(c1: float, c2: float) -> float:
        # |xi - xi'| has density (2h - d) / (2h^2) on [0, 2h]
        def cdf(d: float) -> float:
            d = min(max(d, 0.0), 2 * h)
            return (4 * h * d - d * d) / (4 * h * h)

        return cdf(c2) - cdf(c1)

    return ContinuousLaw(
        label="uniform",
        sample=lambda rng, size: rng.uniform(-h, h, size),
        diff_interval_mass=_mass,
    )


def parse_law(text: str) -> Law:
    """Parse a config-file law literal.

    Accepted: ``bernoulli``, ``lazy(mu)``, ``uniform3``, ``gaussian``,
    ``uniform``, and inline atom lists ``atoms[(v,p),...]`` with rational
    entries like ``1/2``.
    """
    t = text.strip()
    if t == "bernoulli":
        return bernoulli()
    if t == "uniform3":
        return uniform3()
    if t == "gaussian":
        return gaussian()
    if t == "uniform":
        return uniform_continuous()
    if t.startswith("lazy(") and t.endswith(")"):
        return lazy_sign(Fraction(t[5:-1]))
    if t.startswith("atoms[") and t.endswith("]"):
        body = t[6:-1].strip()
        pairs = []
        for chunk in body.replace(" ", "").split("),("):
            chunk = chunk.strip("()")
            if not chunk:
                continue
            v, p = chunk.split(",")
            pairs.append((Fraction(v), Fraction(p)))
        return AtomicLaw(tuple(pairs), label=text)
    raise ValueError(f"unknown law literal: {text!r}")


# ---------------------------------------------------------------------------
# derived laws


def _sqrt_exact(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def standardize(law: AtomicLaw) -> AtomicLaw:
    """Affine rescale to zero mean and unit variance.

    Exact when the variance is the square of a rational; otherwise the
    scale is a float and atom values come out floating.
    """
    if len(law.atoms) < 2:
        raise DegenerateLaw("a single atom has zero variance")
    var = law.variance
    if var == 0:
        raise DegenerateLaw("zero-variance law cannot be standardized")
    mean = law.mean
    scale: Scalar
    if isinstance(var, Fraction):
        root = _sqrt_exact(var)
        scale = 1 / root if root is not None else 1.0 / math.sqrt(float(var))
    else:
        scale = 1.0 / math.sqrt(float(var))
    atoms = []
    for v, p in law.atoms:
        centered = v - mean
        if isinstance(scale, Fraction) and isinstance(centered, Fraction):
            atoms.append((centered * scale, p))
        else:
            atoms.append((float(centered) * float(scale), p))
    return AtomicLaw(tuple(atoms), label=law.label or "standardized")


def _convolve(a: AtomicLaw, b: AtomicLaw, negate_b: bool = False) -> AtomicLaw:
    acc = {}
    for v1, p1 in a.atoms:
        for v2, p2 in b.atoms:
            v = v1 - v2 if negate_b else v1 + v2
            acc[v] = acc.get(v, 0) + p1 * p2
    return AtomicLaw(tuple(acc.items()))


def difference_law(law: AtomicLaw) -> AtomicLaw:
    """Exact law of xi - xi' for independent copies."""
    out = _convolve(law, law, negate_b=True)
    return AtomicLaw(out.atoms, label=f"diff({law.label})" if law.label else "diff")


def lazy_difference_law(law: AtomicLaw, mu) -> AtomicLaw:
    """Exact law of eta^(mu) * (xi - xi')."""
    mu = _as_scalar(mu)
    if not (0 <= mu <= 1):
        raise ValueError("mu must lie in [0, 1]")
    d = difference_law(law)
    acc = {Fraction(0): 1 - mu}
    for v, p in d.atoms:
        for s in (1, -1):
            key = v * s
            acc[key] = acc.get(key, 0) + p * (mu / 2)
    label = f"lazydiff({law.label},{float(mu)})" if law.label else "lazydiff"
    return AtomicLaw(tuple(acc.items()), label=label)


def verify_spacing(law: Law, cert: SpacingCertificate) -> bool:
    """Check P(c1 <= |xi - xi'| <= c2) >= c3.

    Exact for atomic laws; continuous laws use their interval-mass
    function with a 1e-9 absolute tolerance.
    """
    if isinstance(law, AtomicLaw):
        d = difference_law(law)
        mass = sum(p for v, p in d.atoms if cert.c1 <= abs(v) <= cert.c2)
        return mass >= cert.c3
    if law.diff_interval_mass is None:
        raise ValueError(f"law {law.label!r} has no difference-mass function")
    mass = law.diff_interval_mass(float(cert.c1), float(cert.c2))
    return mass >= float(cert.c3) - 1e-9


def atom_bound_holds(law: AtomicLaw, cert: SpacingCertificate) -> bool:
    """Largest-atom bound sup_a P(xi = a) <= sqrt(1 - c3), squared to stay exact."""
    m = law.max_atom_mass
    return m * m <= 1 - cert.c3


def auto_certificate(law: Law) -> Optional[SpacingCertificate]:
    """Best spacing certificate derivable from the law itself.

    Atomic: c1, c2 bracket the nonzero atoms of xi - xi' and c3 is their
    exact total mass.  Continuous: a fixed window [1/2, 4] with its
    difference mass.  None when no certificate exists (point masses).
    """
    if isinstance(law, AtomicLaw):
        d = difference_law(law)
        nz = [(v, p) for v, p in d.atoms if v > 0]
        if not nz:
            return None
        c1 = min(v for v, _ in nz)
        c2 = max(v for v, _ in nz)
        c3 = 2 * sum(p for _, p in nz)
        return SpacingCertificate(c1, c2, c3)
    if law.diff_interval_mass is None:
        return None
    mass = law.diff_interval_mass(0.5, 4.0)
    if mass <= 0:
        return None
    return SpacingCertificate(0.5, 4.0, mass)


# ---------------------------------------------------------------------------
# truncated sampling


def sample_truncated(source: Law, cfg: SamplerConfig, count: int) -> np.ndarray:
    """iid draws with |draw| <= n^(B+1) enforced by per-index rejection.

    The value at index i is a pure function of (cfg.seed, i): draws are
    generated from chunked substreams keyed (seed, chunk), so any worker
    split along chunk boundaries reproduces the serial stream bit for
    bit.  A law whose entire in-bound mass is zero raises
    RejectionDiverges (the retry cap would be exhausted anyway).
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    bound = cfg.bound
    if isinstance(source, AtomicLaw):
        inside = sum(p for v, p in source.atoms if abs(float(v)) <= bound)
        if float(inside) == 0.0:
            raise RejectionDiverges(
                f"no mass of {source.label or 'law'} inside |x| <= {bound}")
    out = np.empty(count, dtype=np.float64)
    for ci, start, stop in chunk_bounds(count):
        rng = substream(cfg.seed, ci)
        block = source.sample_values(rng, stop - start)
        bad = np.abs(block) > bound
        tries = 0
        while bad.any():
            tries += 1
            if tries > RETRY_CAP:
                raise RejectionDiverges(
                    f"rejection cap {RETRY_CAP} exceeded at bound {bound}")
            block[bad] = source.sample_values(rng, int(bad.sum()))
            bad = np.abs(block) > bound
        out[start:stop] = block
    return out
