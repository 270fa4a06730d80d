"""Positive L1/L-infinity contractions on the matrix algebra.

A `DSMap` stores one of four concrete representations (Kraus family, unitary
conjugation, substochastic action on diagonals, permutation conjugation) or a
raw superoperator matrix for maps assembled from others.  `verify_ds` checks
the contraction properties by sampling; `jdlg_split` computes the splitting of
operator space into the span of unimodular eigenvectors and its complementary
invariant ("flight") subspace.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra import AlgebraContext, _as_matrix, hermitize, op_norm
from .reporting import CERT_TOL, CertificateReport

KINDS = ("kraus", "unitary", "stochastic", "permutation", "superop")


def vec(x: np.ndarray) -> np.ndarray:
    return x.reshape(-1)


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape(n, n)


@dataclass
class DSMap:
    """Positive linear map on the algebra in one of several representations."""

    kind: str
    payload: object
    context: AlgebraContext
    _superop: np.ndarray | None = field(default=None, repr=False)

    # -- constructors ------------------------------------------------------

    @classmethod
    def kraus(cls, ops, context: AlgebraContext) -> "DSMap":
        mats = [np.asarray(a, dtype=complex) for a in ops]
        for a in mats:
            context._check_dim(a)
        return cls("kraus", mats, context)

    @classmethod
    def unitary(cls, u, context: AlgebraContext, tol: float = 1e-8) -> "DSMap":
        um = np.asarray(u, dtype=complex)
        context._check_dim(um)
        if op_norm(um @ um.conj().T - context.identity()) > tol:
            raise ValueError("matrix is not unitary within tolerance")
        return cls("unitary", um, context)

    @classmethod
    def stochastic(cls, p, context: AlgebraContext) -> "DSMap":
        pm = np.asarray(p, dtype=float)
        context._check_dim(pm)
        if np.any(pm < 0):
            raise ValueError("stochastic payload must be nonnegative")
        if np.any(pm.sum(axis=1) > 1 + 1e-12):
            raise ValueError("stochastic payload must be row-substochastic")
        return cls("stochastic", pm, context)

    @classmethod
    def permutation(cls, perm, context: AlgebraContext) -> "DSMap":
        pv = np.asarray(perm, dtype=int)
        if sorted(pv.tolist()) != list(range(context.dim)):
            raise ValueError("not a permutation of 0..N-1")
        return cls("permutation", pv, context)

    @classmethod
    def from_superop(cls, m, context: AlgebraContext) -> "DSMap":
        mm = np.asarray(m, dtype=complex)
        n2 = context.dim**2
        if mm.shape != (n2, n2):
            raise ValueError("superoperator must be N^2 x N^2")
        return cls("superop", mm, context)

    @classmethod
    def identity(cls, context: AlgebraContext) -> "DSMap":
        return cls.kraus([context.identity()], context)

    # -- action ------------------------------------------------------------

    def apply(self, x) -> np.ndarray:
        xm = _as_matrix(x)
        self.context._check_dim(xm)
        if self.kind == "kraus":
            out = np.zeros_like(xm)
            for a in self.payload:
                out += a @ xm @ a.conj().T
            return out
        if self.kind == "unitary":
            u = self.payload
            return u @ xm @ u.conj().T
        if self.kind == "permutation":
            p = self.payload
            out = np.zeros_like(xm)
            out[np.ix_(p, p)] = xm
            return out
        if self.kind == "stochastic":
            return np.diag(self.payload @ np.diagonal(xm))
        return unvec(self.payload @ vec(xm), self.context.dim)

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def superoperator(self) -> np.ndarray:
        """Matrix of the map on the N^2-dimensional operator space (row-major vec)."""
        if self._superop is not None:
            return self._superop
        n = self.context.dim
        if self.kind == "kraus":
            m = sum(np.kron(a, a.conj()) for a in self.payload)
            m = np.asarray(m, dtype=complex)
        elif self.kind == "unitary":
            m = np.kron(self.payload, self.payload.conj())
        elif self.kind == "permutation":
            pm = np.zeros((n, n))
            pm[self.payload, np.arange(n)] = 1.0
            m = np.kron(pm, pm).astype(complex)
        elif self.kind == "stochastic":
            m = np.zeros((n * n, n * n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    m[i * n + i, j * n + j] = self.payload[i, j]
        else:
            m = self.payload
        self._superop = m
        return m


@dataclass
class DSTuple:
    """Ordered tuple of maps sharing one algebra; `commuting` is a promise
    that is spot-checked by `check_commutation`."""

    maps: list
    commuting: bool = True

    def __post_init__(self):
        if not self.maps:
            raise ValueError("empty tuple")
        ctx = self.maps[0].context
        for t in self.maps:
            if t.context.dim != ctx.dim:
                raise ValueError("maps live in different algebras")

    @property
    def d(self) -> int:
        return len(self.maps)

    @property
    def context(self) -> AlgebraContext:
        return self.maps[0].context


def apply(phi: DSMap, x) -> np.ndarray:
    return phi.apply(x)


def tuple_power(t: DSTuple, k, x) -> np.ndarray:
    """T1^k1 ... Td^kd applied to x; the zero vector returns x unchanged."""
    ks = list(k)
    if len(ks) != t.d:
        raise ValueError("exponent vector length does not match tuple")
    if any(ki < 0 for ki in ks):
        raise ValueError("negative exponent")
    out = _as_matrix(x)
    for phi, ki in zip(reversed(t.maps), reversed(ks)):
        for _ in range(ki):
            out = phi.apply(out)
    return out


def check_commutation(t: DSTuple, samples: int = 4, seed: int = 0,
                      tol: float = 1e-9) -> float:
    """Max pairwise commutation defect sup ||TiTj(x) - TjTi(x)||_inf on samples."""
    rng = np.random.default_rng(seed)
    n = t.context.dim
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for i in range(t.d):
            for j in range(i + 1, t.d):
                a = t.maps[i].apply(t.maps[j].apply(x))
                b = t.maps[j].apply(t.maps[i].apply(x))
                worst = max(worst, op_norm(a - b) / max(1.0, op_norm(x)))
    return worst


def verify_ds(phi: DSMap, samples: int = 32, seed: int = 0,
              tol: float = CERT_TOL) -> CertificateReport:
    """Sample-based Dunford-Schwartz certificate.

    Checks positivity on rank-one probes, subunitality exactly, the trace
    inequality on PSD samples, and norm contraction for p in {1, 1.5, 2, 3,
    inf} on general samples.  Passes iff the worst relative violation is
    within tolerance.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    ctx = phi.context
    n = ctx.dim
    one = ctx.identity()
    viol = {}

    viol["subunital"] = max(0.0, float(np.linalg.eigvalsh(hermitize(phi.apply(one) - one))[-1]))

    worst_pos = 0.0
    worst_tr = 0.0
    for _ in range(samples):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        img = hermitize(phi.apply(np.outer(v, v.conj())))
        worst_pos = max(worst_pos, -float(np.linalg.eigvalsh(img)[0]))
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        x = g @ g.conj().T
        x /= max(1.0, op_norm(x))
        worst_tr = max(worst_tr, ctx.trace_real(phi.apply(x)) - ctx.trace_real(x))
    viol["positivity"] = worst_pos
    viol["trace"] = worst_tr

    for p in (1.0, 1.5, 2.0, 3.0, np.inf):
        worst = 0.0
        for _ in range(samples):
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            g /= max(1.0, op_norm(g))
            worst = max(worst, ctx.lp_norm(phi.apply(g), p) - ctx.lp_norm(g, p))
        viol["p=inf" if np.isinf(p) else f"p={p:g}"] = worst

    achieved = max(viol.values())
    return CertificateReport.from_bounds(
        "dunford-schwartz", 0.0, achieved, tol,
        kind=phi.kind, samples=samples, seed=seed, violations=viol,
    )


def jdlg_split(phi: DSMap, tol: float = 1e-8):
    """Split operator space along the spectrum of the map.

    Returns (unimodular_eigenbasis, flight_dim): eigenpairs (matrix,
    eigenvalue) with |eigenvalue| = 1 within tolerance, and the dimension of
    the complementary invariant subspace.  Warns when the superoperator is
    not diagonalizable within tolerance.
    """
    m = phi.superoperator()
    n = phi.context.dim
    w, v = np.linalg.eig(m)
    if np.linalg.matrix_rank(v, tol=1e-10) < m.shape[0]:
        warnings.warn("superoperator appears defective; eigenbasis is unreliable",
                      RuntimeWarning)
    unimodular = []
    for i in range(len(w)):
        if abs(abs(w[i]) - 1.0) <= tol:
            col = v[:, i]
            unimodular.append((unvec(col / np.linalg.norm(col), n), complex(w[i])))
    return unimodular, m.shape[0] - len(unimodular)


def flight_subspace_basis(phi: DSMap, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of the invariant subspace for |eig| < 1.

    Computed from an ordered Schur form, so it is robust to defective
    eigenvalues in the contracting part.
    """
    m = phi.superoperator()
    _, z, sdim = scipy.linalg.schur(
        m, output="complex", sort=lambda lam: bool(abs(lam) < 1.0 - tol))
    return z[:, :sdim]
