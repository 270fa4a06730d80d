"""Scalar weight sequences over multi-indices.

Sequences live on a finite box [0, H)^d; tail-seminorm estimates stand in for
the limsup quantities, so every estimator reports a value tied to its horizon
and tests assert stabilization rather than exact limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .reporting import CertificateReport

ROOT_OF_UNITY_GUARD = 10**6


@dataclass(frozen=True)
class SectorSpec:
    """Multi-indices with coordinate ratios bounded by C."""

    C: float
    d: int

    def __post_init__(self):
        if self.C < 1:
            raise ValueError("sector constant C must be >= 1")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    def contains(self, n) -> bool:
        n = tuple(int(v) for v in n)
        if len(n) != self.d or any(v < 1 for v in n):
            return False
        return max(n) <= self.C * min(n) + 1e-12


@dataclass(frozen=True)
class WeightSequence:
    """Complex weights on a box of multi-indices, optionally backed by a generator."""

    values: np.ndarray
    generator: object = None
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def horizon(self) -> tuple:
        return self.values.shape

    @classmethod
    def from_function(cls, shape, fn, label=None) -> "WeightSequence":
        shape = _as_shape(shape)
        vals = np.empty(shape, dtype=complex)
        for idx in np.ndindex(*shape):
            vals[idx] = fn(idx)
        return cls(vals, generator=fn, label=label)

    @classmethod
    def constant(cls, shape, c=1.0, label=None) -> "WeightSequence":
        shape = _as_shape(shape)
        return cls(np.full(shape, c, dtype=complex), generator=lambda k: c, label=label)

    def generator_defect(self, samples: int = 16, seed: int = 0) -> float:
        """Largest |generator(k) - values[k]| over sampled indices."""
        if self.generator is None:
            return 0.0
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            idx = tuple(int(rng.integers(0, h)) for h in self.horizon)
            worst = max(worst, abs(complex(self.generator(idx)) - complex(self.values[idx])))
        return worst

    def __sub__(self, other: "WeightSequence") -> "WeightSequence":
        if self.horizon != other.horizon:
            raise ValueError("horizon mismatch")
        return WeightSequence(self.values - other.values)

    def __add__(self, other: "WeightSequence") -> "WeightSequence":
        if self.horizon != other.horizon:
            raise ValueError("horizon mismatch")
        return WeightSequence(self.values + other.values)


def _as_shape(shape) -> tuple:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(int(s) for s in shape)


def _prefix_means(power_values: np.ndarray) -> np.ndarray:
    """Entry [n-1] holds (1/|n|) sum_{k<n} of the input, for every box corner n."""
    s = power_values
    for ax in range(power_values.ndim):
        s = np.cumsum(s, axis=ax)
    for ax, h in enumerate(power_values.shape):
        shape = [1] * power_values.ndim
        shape[ax] = h
        s = s / np.arange(1, h + 1, dtype=float).reshape(shape)
    return s


def _index_grids(shape):
    grids = np.indices(shape) + 1
    return grids.min(axis=0), grids.max(axis=0)


def wq_seminorm_estimate(alpha: WeightSequence, q: float, tail_start: int = 1) -> float:
    """Finite-horizon proxy for the W_q seminorm.

    Sup of the q-th-power Cesaro means over corners n with min component >=
    tail_start, truncated at the horizon; an upper-truncation estimate of the
    limsup.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if tail_start < 1 or tail_start > min(alpha.horizon):
        raise ValueError("tail_start must lie within the horizon")
    means = _prefix_means(np.abs(alpha.values) ** q)
    mins, _ = _index_grids(alpha.horizon)
    sel = means[mins >= tail_start]
    return float(np.max(sel) ** (1.0 / q))


def sector_sup_seminorm(alpha: WeightSequence, q: float, sector: SectorSpec) -> float:
    """Sup of q-th-power Cesaro means over sector corners within the horizon."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if sector.d != alpha.d:
        raise ValueError("sector dimension mismatch")
    means = _prefix_means(np.abs(alpha.values) ** q)
    mins, maxs = _index_grids(alpha.horizon)
    mask = maxs <= sector.C * mins + 1e-12
    return float(np.max(means[mask]) ** (1.0 / q))


def finiteness_transfer_check(alpha: WeightSequence, q: float, C: float) -> CertificateReport:
    """Enumerate the finite-set argument behind seminorm finiteness transfer.

    Sector corners with min component < N all live in [0, CN]^d; N is taken
    as large as the horizon allows.  Reports the max q-mean over that finite
    set and counts containment violations (always zero; the point is the
    enumeration).
    """
    sector = SectorSpec(C, alpha.d)
    n_cap = max(1, int(min(alpha.horizon) / C))
    mins, maxs = _index_grids(alpha.horizon)
    mask = (maxs <= C * mins + 1e-12) & (mins < n_cap)
    outside = int(np.sum(mask & (maxs > C * n_cap + 1e-12)))
    means = _prefix_means(np.abs(alpha.values) ** q)
    max_avg = float(np.max(means[mask]) ** (1.0 / q)) if mask.any() else 0.0
    return CertificateReport.from_bounds(
        "sector-finiteness", 0.0, float(outside), 0.0,
        q=q, C=C, N=n_cap, set_size=int(mask.sum()), max_average=max_avg,
    )


# -- trigonometric polynomials ----------------------------------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """P(n) = sum_j r_j * prod_i lambda_ji^{n_i} with unimodular frequencies."""

    terms: list  # of (coefficient, tuple of unimodular complex frequencies)

    def __post_init__(self):
        terms = [(complex(r), tuple(complex(l) for l in lam)) for r, lam in self.terms]
        d = len(terms[0][1]) if terms else 1
        for r, lam in terms:
            if len(lam) != d:
                raise ValueError("inconsistent frequency dimensions")
            for l in lam:
                if abs(abs(l) - 1.0) > 1e-9:
                    raise ValueError(f"frequency {l} is not unimodular")
        object.__setattr__(self, "terms", terms)

    @property
    def d(self) -> int:
        return len(self.terms[0][1]) if self.terms else 1


def trig_eval(poly: TrigPolynomial, n) -> complex:
    n = tuple(int(v) for v in n) if np.iterable(n) else (int(n),)
    total = 0j
    for r, lam in poly.terms:
        term = r
        for l, ni in zip(lam, n):
            term *= l**ni
        total += term
    return total


def unit_power_sequence(angle_frac: float, length: int) -> np.ndarray:
    """exp(2*pi*i*k*angle_frac) for k < length.

    The phase k*angle_frac is accumulated with a split-step product so the
    reduction mod 1 stays accurate uniformly in k (plain multiplication loses
    ~k*eps of phase).
    """
    angle_frac = float(angle_frac) % 1.0
    hi = np.floor(angle_frac * 2**26) / 2**26
    lo = angle_frac - hi
    k = np.arange(length, dtype=float)
    frac = (k * hi) % 1.0 + k * lo
    return np.exp(2j * np.pi * (frac % 1.0))


def trig_materialize(poly: TrigPolynomial, shape) -> np.ndarray:
    """Evaluate the polynomial over a whole index box."""
    shape = _as_shape(shape)
    if len(shape) != poly.d:
        raise ValueError("shape dimension does not match polynomial")
    out = np.zeros(shape, dtype=complex)
    for r, lam in poly.terms:
        term = np.full((), r, dtype=complex)
        for ax, (l, h) in enumerate(zip(lam, shape)):
            powers = unit_power_sequence(np.angle(l) / (2 * np.pi), h)
            idx = [None] * len(shape)
            idx[ax] = slice(None)
            term = term * powers[tuple(idx)]
        out += term
    return out


def trig_weight_sequence(poly: TrigPolynomial, shape, label=None) -> WeightSequence:
    return WeightSequence(trig_materialize(poly, shape),
                          generator=lambda k: trig_eval(poly, k), label=label)


# -- Besicovitch generation ---------------------------------------------------


def check_not_root_of_unity(mu: complex, guard: int = ROOT_OF_UNITY_GUARD):
    """Reject rotations exp(2*pi*i*p/q) with denominator q <= guard."""
    if abs(abs(mu) - 1.0) > 1e-9:
        raise ValueError("rotation must be unimodular")
    theta = (np.angle(mu) / (2 * np.pi)) % 1.0
    frac = Fraction(theta).limit_denominator(guard)
    if abs(theta * frac.denominator - frac.numerator) < 1e-9:
        raise ValueError(
            f"rotation is a root of unity within guard (order {frac.denominator})")


def besicovitch_generate(fourier_coeffs, mu: complex, lam: complex, length: int):
    """Sample f along an irrational rotation orbit, with its exact trig polynomial.

    f(z) = sum_j c_j z^j; the sequence is alpha_k = f(mu^k * lam) and the
    returned polynomial sum_j (c_j lam^j) (mu^j)^k equals it identically, so
    the W_q distance between the two is zero for polynomial f.
    """
    check_not_root_of_unity(mu)
    if abs(abs(lam) - 1.0) > 1e-9:
        raise ValueError("orbit start point must be unimodular")
    coeffs = [(int(j), complex(c)) for j, c in fourier_coeffs]
    if any(j < 0 for j, _ in coeffs):
        raise ValueError("Fourier degrees must be nonnegative")
    theta = (np.angle(mu) / (2 * np.pi)) % 1.0

    points = lam * unit_power_sequence(theta, length)
    values = np.zeros(length, dtype=complex)
    for j, c in coeffs:
        values += c * points**j

    max_j = max(j for j, _ in coeffs)
    reduced = unit_power_sequence(theta, max_j + 1)
    terms = [(c * lam**j, (reduced[j],)) for j, c in coeffs]
    poly = TrigPolynomial(terms)
    seq = WeightSequence(values, generator=lambda k: trig_eval(poly, k),
                         label="rotation-orbit")
    return seq, poly


def besicovitch_distance(alpha: WeightSequence, poly: TrigPolynomial, q: float,
                         tail_start: int = 1) -> float:
    """Truncated W_q seminorm of alpha minus the polynomial sequence."""
    diff = alpha.values - trig_materialize(poly, alpha.horizon)
    return wq_seminorm_estimate(WeightSequence(diff), q, tail_start)


# -- Hartman diagnostics -------------------------------------------------------


def hartman_estimate(alpha: WeightSequence, lam: complex, horizon: int | None = None):
    """Twisted Cesaro limit diagnostic for a one-parameter sequence.

    Returns (last partial value, max pairwise distance of the partial values
    over the final quarter of the horizon).
    """
    if alpha.d != 1:
        raise ValueError("hartman_estimate requires d = 1")
    h = alpha.horizon[0] if horizon is None else min(int(horizon), alpha.horizon[0])
    twisted = alpha.values[:h] * unit_power_sequence(np.angle(lam) / (2 * np.pi), h)
    partials = np.cumsum(twisted) / np.arange(1, h + 1)
    tail = partials[-max(1, h // 4):]
    osc = 0.0
    step = 512
    for i in range(0, len(tail), step):
        osc = max(osc, float(np.max(np.abs(tail[i:i + step, None] - tail[None, :]))))
    return complex(partials[-1]), osc


def decompose_four_nonneg(alpha: WeightSequence, q: float, C: float):
    """alpha = a0 - a1 + i(a2 - a3) with entrywise nonnegative parts.

    Positive/negative parts of the real and imaginary components; each part
    is pointwise dominated by |alpha|, so its sector seminorm cannot exceed
    the original (checked on the horizon).
    """
    v = alpha.values
    parts = (np.maximum(v.real, 0.0), np.maximum(-v.real, 0.0),
             np.maximum(v.imag, 0.0), np.maximum(-v.imag, 0.0))
    out = tuple(WeightSequence(p.astype(complex)) for p in parts)
    sector = SectorSpec(C, alpha.d)
    bound = sector_sup_seminorm(alpha, q, sector)
    for j, part in enumerate(out):
        got = sector_sup_seminorm(part, q, sector)
        if got > bound * (1 + 1e-12) + 1e-15:
            raise RuntimeError(f"part {j} seminorm {got} exceeds original {bound}")
    return out
