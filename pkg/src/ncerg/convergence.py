"""Convergence diagnostics with projection certificates.

Finite runs certify Cauchy behavior only: "converged" means the sup
oscillation over the final quarter of the index sequence is below a declared
tolerance, and every certificate carries its tail profile so stabilization
can be judged from the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgebraContext, Projection, _as_matrix, hermitize,
                      meet_from_perp_sum, op_norm, projection_from_basis)
from .averages import SectorSequence, average_stream, interleave
from .dsop import DSMap, DSTuple, flight_subspace_basis, unvec, vec
from .reporting import CERT_TOL, CertificateReport
from .weights import (SectorSpec, WeightSequence, _prefix_means,
                      wq_seminorm_estimate)

CONV_TOL = 1e-6


@dataclass
class BauCertificate:
    """Bilateral almost-uniform convergence witness along a sequence."""

    epsilon: float
    projection: Projection
    limit: np.ndarray
    tail_profile: list
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    def to_report(self) -> CertificateReport:
        tail = [v for _, v in self.tail_profile]
        quarter = tail[-max(1, len(tail) // 4):]
        achieved = max(quarter) if quarter else 0.0
        rep = CertificateReport.from_bounds(
            "bau-convergence", 0.0, achieved if self.passed else np.inf,
            self.tolerance, witness=self.projection,
            epsilon=self.epsilon, **self.metadata)
        return rep


def _final_quarter(values: list) -> list:
    return values[-max(2, len(values) // 4):]


def _pair_diffs(mats: list) -> list:
    out = []
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
                out.append(mats[i] - mats[j])
    return out


def _abs_matrix(m: np.ndarray) -> np.ndarray:
    """|m| = (m* m)^(1/2); compressing below its spectral cutoff bounds ||m e||."""
    w, u = np.linalg.eigh(hermitize(m.conj().T @ m))
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T


def _meet_abs_below(diffs: list, cutoff: float, ctx: AlgebraContext) -> Projection:
    acc = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for dmat in diffs:
        w, u = np.linalg.eigh(_abs_matrix(dmat))
        mask = w > cutoff
        if mask.any():
            cols = u[:, mask]
            acc += cols @ cols.conj().T
    return meet_from_perp_sum(acc, max(1, len(diffs)), ctx)


def bau_limit_estimate(T: DSTuple, alpha: WeightSequence, x, seq: SectorSequence,
                       epsilon: float, tol_conv: float | None = None,
                       cutoff_grid=(64.0, 16.0, 4.0, 1.0)) -> BauCertificate:
    """Estimate the limit along a sector sequence and search for a witness.

    The limit estimate is the final average.  The identity is tried first (in
    finite dimensions the fixtures converge in norm); otherwise the witness is
    a meet of spectral projections of pairwise tail differences at the finest
    cutoff whose complement fits the epsilon budget.
    """
    ctx = T.context
    xm = _as_matrix(x)
    tol = tol_conv if tol_conv is not None else CONV_TOL * max(1.0, op_norm(xm))
    results = average_stream(T, alpha, xm, seq)
    mats = [r.value for r in results]
    limit = mats[-1]
    tail = _final_quarter(mats)
    diffs = _pair_diffs(tail)

    identity = projection_from_basis(np.eye(ctx.dim, dtype=complex), ctx)
    candidates = [identity]
    osc_full = max((op_norm(d) for d in diffs), default=0.0)
    if osc_full > tol:
        for factor in sorted(cutoff_grid, reverse=True):
            e = _meet_abs_below(diffs, factor * tol, ctx)
            if e.trace_perp() <= epsilon:
                candidates.append(e)
    # Re-verification is a separate pass over the chosen projection.
    best = None
    for e in candidates:
        profile = [(r.n, op_norm(e.entries @ (r.value - limit) @ e.entries))
                   for r in results]
        quarter = [v for _, v in _final_quarter(profile)]
        osc = max(quarter)
        ok = e.trace_perp() <= epsilon and osc <= tol
        if best is None or (ok and not best[2]) or (ok == best[2] and osc < best[1]):
            best = (e, osc, ok, profile)
        if ok and e is identity:
            break
    e, osc, ok, profile = best
    return BauCertificate(
        epsilon=epsilon, projection=e, limit=limit, tail_profile=profile,
        tolerance=tol, passed=ok,
        metadata={"oscillation": osc, "pairwise_oscillation": osc_full,
                  "sequence_length": len(results),
                  "identity_witness": bool(e is identity)})


def closure_transfer_check(T: DSTuple, x, alpha: WeightSequence,
                           beta: WeightSequence, seq: SectorSequence,
                           horizon: int | None = None,
                           tol: float = CERT_TOL) -> CertificateReport:
    """Weight-perturbation bound for averages of a bounded element.

    At each index the difference of averages is compared against the l1 mean
    of the weight difference times the sup norm of x; the report also carries
    the truncated W_1 proxy, which dominates every per-index mean within the
    horizon.
    """
    xm = _as_matrix(x)
    xnorm = op_norm(xm)
    diff = alpha - beta
    res_a = average_stream(T, alpha, xm, seq)
    res_b = average_stream(T, beta, xm, seq)
    worst_excess = 0.0
    worst_ratio = 0.0
    abs_means = _prefix_means(np.abs(diff.values))
    for ra, rb in zip(res_a, res_b):
        lhs = op_norm(ra.value - rb.value)
        bound = float(abs_means[tuple(v - 1 for v in ra.n)].real) * xnorm
        scale = max(1.0, bound)
        worst_excess = max(worst_excess, (lhs - bound) / scale)
        if bound > 1e-14:
            worst_ratio = max(worst_ratio, lhs / bound)
    w1 = wq_seminorm_estimate(diff, 1.0, 1)
    if horizon is not None:
        w1 = wq_seminorm_estimate(
            WeightSequence(diff.values[tuple(slice(0, horizon) for _ in range(diff.d))]),
            1.0, 1)
    return CertificateReport.from_bounds(
        "closure-transfer", 0.0, max(0.0, worst_excess), tol,
        x_norm=xnorm, w1_truncated=w1, achieved_over_claimed=worst_ratio,
        sequence_length=len(res_a))


def subsequential_uniqueness_check(T: DSTuple, alpha: WeightSequence, x,
                                   seq_a: SectorSequence, seq_b: SectorSequence,
                                   tol_conv: float | None = None) -> CertificateReport:
    """Limits along two sector sequences agree: the interleaved sequence stays
    in the larger sector, so both are subsequential limits of one sequence."""
    xm = _as_matrix(x)
    tol = tol_conv if tol_conv is not None else CONV_TOL * max(1.0, op_norm(xm))
    merged = interleave(seq_a, seq_b)
    lim_a = average_stream(T, alpha, xm, seq_a)[-1].value
    lim_b = average_stream(T, alpha, xm, seq_b)[-1].value
    achieved = op_norm(lim_a - lim_b)
    return CertificateReport.from_bounds(
        "subsequential-uniqueness", 0.0, achieved, tol,
        merged_sector_constant=merged.sector.C,
        merged_length=len(merged.indices))


def bww_membership_check(T: DSMap, x, weight_family, epsilon: float,
                         horizon: int = 64, tol_conv: float | None = None,
                         cutoff_grid=(1.0, 4.0, 16.0, 64.0)) -> CertificateReport:
    """Search for one projection making all family-weighted averages Cauchy.

    The single witness must work for every weight sequence simultaneously;
    on failure the report names the worst sequence in the family.
    """
    if not weight_family:
        raise ValueError("empty weight family")
    ctx = T.context
    xm = _as_matrix(x)
    tol = tol_conv if tol_conv is not None else CONV_TOL * max(1.0, op_norm(xm))
    tup = DSTuple([T])
    streams = []
    for k, alpha in enumerate(weight_family):
        if alpha.d != 1:
            raise ValueError("bWW checks are single-parameter")
        if horizon > alpha.horizon[0]:
            raise ValueError("weight horizon does not cover the requested box")
        seq = SectorSequence(tuple((n,) for n in range(1, horizon + 1)),
                             sector=SectorSpec(1.0, 1))
        mats = [r.value for r in average_stream(tup, alpha, xm, seq)]
        streams.append((alpha.label or f"weight[{k}]", mats))

    def worst_osc(e: Projection):
        worst = (None, -1.0)
        for name, mats in streams:
            tail = _final_quarter(mats)
            osc = max(op_norm(e.entries @ (a - b) @ e.entries)
                      for a, b in zip(tail, tail[1:]))
            diffs = _pair_diffs(tail)
            osc = max(osc, max(op_norm(e.entries @ d @ e.entries) for d in diffs))
            if osc > worst[1]:
                worst = (name, osc)
        return worst

    identity = projection_from_basis(np.eye(ctx.dim, dtype=complex), ctx)
    name, osc = worst_osc(identity)
    e = identity
    if osc > tol:
        all_diffs = [d for _, mats in streams for d in _pair_diffs(_final_quarter(mats))]
        for factor in cutoff_grid:
            cand = _meet_abs_below(all_diffs, factor * tol, ctx)
            if cand.trace_perp() <= epsilon:
                cname, cosc = worst_osc(cand)
                if cosc < osc:
                    e, name, osc = cand, cname, cosc
                if cosc <= tol:
                    break
    passed_budget = e.trace_perp() <= epsilon
    achieved = osc if passed_budget else np.inf
    return CertificateReport.from_bounds(
        "bww-membership", 0.0, achieved, tol, witness=e,
        epsilon=epsilon, horizon=horizon, family_size=len(streams),
        worst_weight=name, identity_witness=bool(e is identity))


def jdlg_flight_decay_check(phi: DSMap, horizon: int = 128,
                            tol: float = 1e-6) -> CertificateReport:
    """Iterates of the map vanish on the flight part of operator space.

    For each flight-basis element the l2 norms of the iterates are followed;
    the claim is that some tail iterate falls below tolerance, and the
    density of sub-tolerance tail indices is reported.
    """
    ctx = phi.context
    basis = flight_subspace_basis(phi)
    if basis.shape[1] == 0:
        return CertificateReport.from_bounds(
            "jdlg-flight-decay", 0.0, 0.0, tol, flight_dim=0, vacuous=True)
    sup = phi.superoperator()
    worst_min = 0.0
    densities = []
    for idx in range(basis.shape[1]):
        v = basis[:, idx]
        norms = []
        cur = v.copy()
        for _ in range(horizon):
            cur = sup @ cur
            norms.append(ctx.lp_norm(unvec(cur, ctx.dim), 2.0))
        tail = norms[-max(1, horizon // 4):]
        worst_min = max(worst_min, min(tail))
        densities.append(float(np.mean([t <= tol for t in tail])))
    return CertificateReport.from_bounds(
        "jdlg-flight-decay", 0.0, worst_min, tol,
        flight_dim=basis.shape[1], horizon=horizon,
        min_decay_density=float(min(densities)))
