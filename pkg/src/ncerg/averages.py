"""Weighted multiparameter ergodic averages over index boxes and sectors.

Averages are computed from an orbit tensor: the array of T^k(x) over a whole
index box, built by sweeping each axis once with the superoperator of that
axis map (so the cost is one matrix-vector product per box entry and partial
sums over prefixes are reused via cumulative sums).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import _as_matrix
from .dsop import DSTuple
from .weights import SectorSpec, WeightSequence, _as_shape


@dataclass(frozen=True)
class AverageResult:
    """One average: the index, the matrix value, and the divisor applied.

    `normalization` is |n| for plain weighted averages and the weight
    seminorm for normalized ones (0 signals the zero-weight convention).
    """

    n: tuple
    value: np.ndarray
    normalization: float


@dataclass(frozen=True)
class SectorSequence:
    """A sequence of sector indices, optionally flagged as tending to infinity."""

    indices: tuple
    sector: SectorSpec
    tends_to_infinity: bool = False

    def __post_init__(self):
        idx = tuple(tuple(int(v) for v in n) for n in self.indices)
        if not idx:
            raise ValueError("empty index sequence")
        for n in idx:
            if not self.sector.contains(n):
                raise ValueError(f"index {n} lies outside the sector")
        if self.tends_to_infinity:
            mins = [min(n) for n in idx]
            if any(b < a for a, b in zip(mins, mins[1:])):
                raise ValueError("min components must be nondecreasing for a "
                                 "tending-to-infinity sequence")
        object.__setattr__(self, "indices", idx)

    @property
    def d(self) -> int:
        return self.sector.d


def diagonal_sequence(d: int, count: int, step: int = 1, C: float = 1.0) -> SectorSequence:
    idx = [tuple([k * step] * d) for k in range(1, count + 1)]
    return SectorSequence(tuple(idx), SectorSpec(C, d), tends_to_infinity=True)


def interleave(a: SectorSequence, b: SectorSequence) -> SectorSequence:
    """Merge two sector sequences alternately; lives in the larger sector."""
    if a.d != b.d:
        raise ValueError("dimension mismatch")
    merged = []
    for na, nb in zip(a.indices, b.indices):
        merged.extend([na, nb])
    la, lb = len(a.indices), len(b.indices)
    merged.extend(a.indices[lb:] if la > lb else b.indices[la:])
    return SectorSequence(tuple(merged), SectorSpec(max(a.sector.C, b.sector.C), a.d))


def sector_indices(sector: SectorSpec, horizon: int) -> list:
    """All sector indices with components <= horizon, ordered by min component
    then lexicographically (fixed so reports are reproducible)."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if sector.d == 1:
        return [(n,) for n in range(1, horizon + 1)]
    found = [n for n in np.ndindex(*([horizon] * sector.d))
             if sector.contains(tuple(v + 1 for v in n))]
    out = [tuple(v + 1 for v in n) for n in found]
    out.sort(key=lambda n: (min(n), n))
    return out


def orbit_tensor(t: DSTuple, x, shape) -> np.ndarray:
    """Array of T^k(x) over the box [0, shape): shape + (N, N)."""
    shape = _as_shape(shape)
    if len(shape) != t.d:
        raise ValueError("box dimension does not match tuple")
    n = t.context.dim
    ten = _as_matrix(x).reshape((1,) * t.d + (n * n,))
    # Sweep the last axis first so ten[k] = T1^k1 ... Td^kd (x) exactly.
    for ax in reversed(range(t.d)):
        sup = t.maps[ax].superoperator()
        reps = [1] * ten.ndim
        reps[ax] = shape[ax]
        grown = np.tile(ten, reps)
        view = np.moveaxis(grown, ax, 0)
        for k in range(1, shape[ax]):
            view[k] = view[k - 1] @ sup.T
        ten = grown
    return ten.reshape(shape + (n, n))


def prefix_sums(weighted: np.ndarray, d: int) -> np.ndarray:
    """Cumulative sums along the first d axes; entry [n-1] is sum over k < n."""
    s = weighted
    for ax in range(d):
        s = np.cumsum(s, axis=ax)
    return s


def weighted_prefix_averages(t: DSTuple, alpha_values: np.ndarray, x,
                             orbit: np.ndarray | None = None) -> np.ndarray:
    """All box-prefix averages (1/|n|) sum_{k<n} alpha_k T^k(x) at once."""
    shape = alpha_values.shape
    if orbit is None:
        orbit = orbit_tensor(t, x, shape)
    weighted = alpha_values[..., None, None] * orbit
    s = prefix_sums(weighted, len(shape))
    for ax, h in enumerate(shape):
        div = [1] * s.ndim
        div[ax] = h
        s = s / np.arange(1, h + 1, dtype=float).reshape(div)
    return s


def _check_cover(alpha: WeightSequence, n) -> tuple:
    n = _as_shape(n)
    if len(n) != alpha.d:
        raise ValueError("index dimension does not match weights")
    if any(v < 1 for v in n):
        raise ValueError("index components must be >= 1")
    if any(v > h for v, h in zip(n, alpha.horizon)):
        raise ValueError(f"index {n} exceeds the weight horizon {alpha.horizon}")
    return n


def weighted_average(t: DSTuple, alpha: WeightSequence, x, n) -> AverageResult:
    """The n-th weighted average (1/|n|) sum_{k<n} alpha_k T^k(x)."""
    n = _check_cover(alpha, n)
    if len(n) != t.d:
        raise ValueError("index dimension does not match tuple")
    slab = alpha.values[tuple(slice(0, v) for v in n)]
    orbit = orbit_tensor(t, x, n)
    size = float(np.prod(n))
    value = np.tensordot(slab, orbit, axes=len(n)) / size
    return AverageResult(n=n, value=value, normalization=size)


def normalized_weighted_average(t: DSTuple, alpha: WeightSequence, x, n,
                                q: float, C: float) -> AverageResult:
    """Weighted average divided by the sector seminorm; zero weights give the
    zero matrix (0/0 := 0)."""
    from .weights import sector_sup_seminorm

    n = _check_cover(alpha, n)
    s = sector_sup_seminorm(alpha, q, SectorSpec(C, alpha.d))
    if s == 0.0:
        dim = t.context.dim
        return AverageResult(n=n, value=np.zeros((dim, dim), dtype=complex),
                             normalization=0.0)
    base = weighted_average(t, alpha, x, n)
    return AverageResult(n=n, value=base.value / s, normalization=s)


def average_stream(t: DSTuple, alpha: WeightSequence, x,
                   seq: SectorSequence) -> list:
    """Averages along a sector sequence, sharing one orbit tensor."""
    box = tuple(max(n[i] for n in seq.indices) for i in range(seq.d))
    _check_cover(alpha, box)
    slab = alpha.values[tuple(slice(0, v) for v in box)]
    prefixes = weighted_prefix_averages(t, slab, x)
    out = []
    for n in seq.indices:
        idx = tuple(v - 1 for v in n)
        out.append(AverageResult(n=n, value=prefixes[idx],
                                 normalization=float(np.prod(n))))
    return out
