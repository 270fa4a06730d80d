"""Reduction of order: domination of cube averages by a single auxiliary operator.

The positive weight family defining the auxiliary operator is an input (two
built-in generators serve as fixtures); the domination constant and the inner
average length are calibrated numerically, then certified on rank-one probes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import hermitize, op_norm
from .dsop import DSMap, DSTuple, unvec, vec
from .reporting import CERT_TOL, CertificateReport
from .sampling import random_unit_vector

DEFICIT_THRESHOLD = 1e-6
CHI_CAP = 1e6


@dataclass
class BrunelWeights:
    """Truncated positive weight family with a candidate domination constant.

    `nd_map` sends an outer average length n to the inner length over the
    auxiliary operator.  d = 1 is allowed as a degenerate sanity
    configuration (weights concentrated at 1 make the auxiliary operator the
    original map).
    """

    d: int
    a: dict
    chi: float
    nd_map: object = field(default=lambda n: n)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        clean = {}
        for key, val in self.a.items():
            key = tuple(int(v) for v in (key if np.iterable(key) else (key,)))
            if len(key) != self.d or any(v < 0 for v in key):
                raise ValueError(f"bad weight index {key}")
            if val <= 0:
                raise ValueError("weights must be strictly positive on their support")
            clean[key] = float(val)
        if not clean:
            raise ValueError("empty weight family")
        total = sum(clean.values())
        if total > 1 + 1e-12:
            raise ValueError(f"weights sum to {total} > 1")
        self.a = clean
        if self.chi <= 0:
            raise ValueError("chi must be positive")

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - sum(self.a.values()))

    @property
    def radius(self) -> int:
        return max(max(k) for k in self.a)


def geometric_weights(d: int, H: int, ratio: float = 0.5, chi: float = 1.0,
                      normalize: bool = True) -> BrunelWeights:
    """Product-geometric weights truncated to the box [0, H]^d."""
    raw = {}
    for idx in np.ndindex(*([H + 1] * d)):
        raw[idx] = float(np.prod([(1 - ratio) * ratio**k for k in idx]))
    if normalize:
        total = sum(raw.values())
        raw = {k: v / total for k, v in raw.items()}
    return BrunelWeights(d, raw, chi)


def uniform_box_weights(d: int, H: int, chi: float = 1.0) -> BrunelWeights:
    """Uniform weights on the box [0, H]^d (sum exactly one)."""
    count = (H + 1) ** d
    return BrunelWeights(d, {idx: 1.0 / count for idx in np.ndindex(*([H + 1] * d))}, chi)


def brunel_operator(T: DSTuple, w: BrunelWeights,
                    deficit_threshold: float = DEFICIT_THRESHOLD) -> DSMap:
    """S = sum_n a_n T^n as a superoperator-backed map."""
    if T.d != w.d:
        raise ValueError("dimension mismatch")
    if w.deficit > deficit_threshold:
        raise ValueError(f"weight deficit {w.deficit:.2e} exceeds threshold")
    n2 = T.context.dim ** 2
    powers = []
    for ax in range(T.d):
        sup = T.maps[ax].superoperator()
        axis_powers = [np.eye(n2, dtype=complex)]
        hmax = max(k[ax] for k in w.a)
        for _ in range(hmax):
            axis_powers.append(axis_powers[-1] @ sup)
        powers.append(axis_powers)
    total = np.zeros((n2, n2), dtype=complex)
    for idx, val in sorted(w.a.items()):
        term = powers[0][idx[0]]
        for ax in range(1, T.d):
            term = term @ powers[ax][idx[ax]]
        total += val * term
    return DSMap.from_superop(total, T.context)


def _cube_average_superop(T: DSTuple, n: int) -> np.ndarray:
    """Superoperator of (1/n^d) sum over the cube [0, n)^d of T^k."""
    n2 = T.context.dim ** 2
    total = np.eye(n2, dtype=complex)
    for phi in T.maps:
        sup = phi.superoperator()
        acc = np.zeros((n2, n2), dtype=complex)
        power = np.eye(n2, dtype=complex)
        for _ in range(n):
            acc += power
            power = power @ sup
        total = total @ (acc / n)
    return total


def _inner_average_superop(S: DSMap, n_d: int) -> np.ndarray:
    n2 = S.context.dim ** 2
    acc = np.zeros((n2, n2), dtype=complex)
    power = np.eye(n2, dtype=complex)
    sup = S.superoperator()
    for _ in range(n_d):
        acc += power
        power = power @ sup
    return acc / n_d


def domination_check(T: DSTuple, w: BrunelWeights, n: int, probes: int = 32,
                     seed: int = 0, tol: float = CERT_TOL,
                     S: DSMap | None = None) -> CertificateReport:
    """Loewner domination of the cube average by chi/n_d times inner averages.

    Checked on random rank-one PSD probes; linearity plus positivity of both
    sides makes rank-one probes decisive for PSD mixtures.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    dim = T.context.dim
    S = S or brunel_operator(T, w)
    n_d = int(w.nd_map(n))
    lhs_sup = _cube_average_superop(T, n)
    rhs_sup = w.chi * _inner_average_superop(S, n_d)
    worst = 0.0
    min_margin = np.inf
    for _ in range(probes):
        v = random_unit_vector(rng, dim)
        x = np.outer(v, v.conj())
        lhs = unvec(lhs_sup @ vec(x), dim)
        rhs = unvec(rhs_sup @ vec(x), dim)
        diff = hermitize(rhs - lhs)
        margin = float(np.linalg.eigvalsh(diff)[0])
        scale = max(1.0, op_norm(lhs), op_norm(rhs))
        worst = max(worst, -margin / scale)
        min_margin = min(min_margin, margin)
    return CertificateReport.from_bounds(
        "brunel-domination", 0.0, worst, tol,
        n=n, n_d=n_d, chi=w.chi, probes=probes, seed=seed,
        min_margin=float(min_margin), deficit=w.deficit,
    )


def search_parameters(T: DSTuple, a: dict, n_range, probes: int = 16,
                      seed: int = 0, chi_cap: float = CHI_CAP,
                      nd_cap: int = 64, safety: float = 1.02) -> BrunelWeights:
    """Calibrate (chi, n_d) so the domination certificate passes.

    For each outer length n, scans inner lengths and binary-searches the
    minimal feasible chi on the probe set; returns weights carrying the max
    chi over the range (inflated slightly, since finitely many probes only
    lower-bound the true constant) and the per-n best inner lengths.
    """
    rng = np.random.default_rng(seed)
    base = BrunelWeights(len(next(iter(a))), dict(a), 1.0)
    S = brunel_operator(DSTuple(T.maps, commuting=T.commuting), base)
    dim = T.context.dim
    probe_mats = []
    for _ in range(probes):
        v = random_unit_vector(rng, dim)
        probe_mats.append(np.outer(v, v.conj()))

    best_nd = {}
    chi_overall = 0.0
    for n in n_range:
        lhs_sup = _cube_average_superop(T, n)
        lhs_imgs = [unvec(lhs_sup @ vec(x), dim) for x in probe_mats]
        nd_limit = min(nd_cap, max(1, (base.radius + 1) * n))
        best = None
        for n_d in range(1, nd_limit + 1):
            rhs_sup = _inner_average_superop(S, n_d)
            rhs_imgs = [unvec(rhs_sup @ vec(x), dim) for x in probe_mats]
            chi = _bisect_min_chi(lhs_imgs, rhs_imgs, chi_cap)
            if chi is not None and (best is None or chi < best[0]):
                best = (chi, n_d)
        if best is None:
            raise RuntimeError(
                f"no feasible chi below {chi_cap} at n={n}; the weight family "
                "cannot dominate this tuple on the probe set")
        chi_overall = max(chi_overall, best[0])
        best_nd[int(n)] = best[1]

    ratios = [nd / n for n, nd in best_nd.items()]
    fallback = float(np.median(ratios))

    def nd_map(n, table=dict(best_nd), r=fallback):
        return table.get(int(n), max(1, round(r * n)))

    return BrunelWeights(base.d, dict(a), chi_overall * safety, nd_map)


def _bisect_min_chi(lhs_imgs, rhs_imgs, chi_cap, iters: int = 48,
                    tol: float = 1e-10):
    """Smallest chi with chi*rhs - lhs PSD on every probe (None if infeasible)."""

    def feasible(chi: float) -> bool:
        for lhs, rhs in zip(lhs_imgs, rhs_imgs):
            diff = hermitize(chi * rhs - lhs)
            scale = max(1.0, chi * op_norm(rhs), op_norm(lhs))
            if float(np.linalg.eigvalsh(diff)[0]) < -tol * scale:
                return False
        return True

    if not feasible(chi_cap):
        return None
    lo, hi = 0.0, float(chi_cap)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi
