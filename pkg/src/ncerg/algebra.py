"""Finite-dimensional matrix algebra with a weighted trace.

The ambient algebra is the full N x N complex matrix algebra.  A strictly
positive weight vector defines the trace functional tau(x) = sum_i w_i x_ii;
all-ones weights recover the ordinary matrix trace, and diagonal matrices
embed the commutative case with a weighted counting measure.

Everything here is dense numpy: Loewner order tests, functional calculus by
eigendecomposition, spectral projections, p-norms, positive four-part splits
and projection meets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Default tolerances.  Order checks are relative to max(1, norms involved).
PSD_TOL = 1e-9
HERM_TOL = 1e-10
MEET_TOL = 1e-7


def _as_matrix(a) -> np.ndarray:
    """Accept a raw ndarray or anything carrying `.entries`."""
    return np.asarray(getattr(a, "entries", a), dtype=complex)


def op_norm(x) -> float:
    """Operator norm (largest singular value)."""
    x = _as_matrix(x)
    return float(np.linalg.norm(x, 2)) if x.size else 0.0


def hermitize(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2.0


@dataclass(frozen=True)
class AlgebraContext:
    """Matrix algebra of a fixed dimension with a weighted trace."""

    dim: int
    trace_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        w = self.trace_weights
        w = np.ones(self.dim) if w is None else np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise ValueError("trace_weights must have one entry per dimension")
        if np.any(w <= 0):
            raise ValueError("trace_weights must be strictly positive")
        object.__setattr__(self, "trace_weights", w)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def trace(self, x) -> complex:
        x = _as_matrix(x)
        self._check_dim(x)
        return complex(np.sum(self.trace_weights * np.diagonal(x)))

    def trace_real(self, x) -> float:
        return float(self.trace(x).real)

    def lp_norm(self, x, p: float) -> float:
        """tau(|x|^p)^(1/p) with |x| = (x*x)^(1/2); p = inf is the operator norm."""
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        x = _as_matrix(x)
        self._check_dim(x)
        if np.isinf(p):
            return op_norm(x)
        # |x| = V diag(s) V* from the SVD x = U diag(s) V*.
        _, s, vh = np.linalg.svd(x)
        v = vh.conj().T
        absp = (v * s**p) @ v.conj().T
        val = np.sum(self.trace_weights * np.diagonal(absp).real)
        return float(max(val, 0.0) ** (1.0 / p))

    def _check_dim(self, x: np.ndarray):
        if x.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {x.shape} does not match algebra dim {self.dim}")


@dataclass(frozen=True)
class HermitianOperator:
    """Validated Hermitian element of the algebra."""

    entries: np.ndarray
    context: AlgebraContext

    @property
    def dim(self) -> int:
        return self.context.dim


def hermitian(entries, context: AlgebraContext, tol: float = HERM_TOL) -> HermitianOperator:
    """Symmetrize `entries` to (x + x*)/2 if within tolerance, else reject."""
    x = _as_matrix(entries)
    context._check_dim(x)
    scale = max(1.0, op_norm(x))
    if op_norm(x - x.conj().T) > 2 * tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return HermitianOperator(hermitize(x), context)


@dataclass(frozen=True)
class Projection:
    """Hermitian idempotent with trace bookkeeping."""

    entries: np.ndarray
    context: AlgebraContext

    def complement(self) -> "Projection":
        return Projection(self.context.identity() - self.entries, self.context)

    def trace(self) -> float:
        return self.context.trace_real(self.entries)

    def trace_perp(self) -> float:
        return self.context.trace_real(self.context.identity() - self.entries)

    def rank(self) -> int:
        return int(round(np.trace(self.entries).real))


def projection(entries, context: AlgebraContext, tol: float = 1e-8) -> Projection:
    """Validate an idempotent Hermitian matrix and wrap it."""
    e = _as_matrix(entries)
    context._check_dim(e)
    if op_norm(e - e.conj().T) > tol * max(1.0, op_norm(e)):
        raise ValueError("projection is not Hermitian")
    if op_norm(e @ e - e) > tol * max(1.0, op_norm(e)):
        raise ValueError("projection is not idempotent")
    eigs = np.linalg.eigvalsh(hermitize(e))
    if np.any(np.minimum(np.abs(eigs), np.abs(eigs - 1.0)) > 1e-6):
        raise ValueError("projection has eigenvalues away from {0, 1}")
    return Projection(hermitize(e), context)


def projection_from_basis(columns: np.ndarray, context: AlgebraContext) -> Projection:
    """Orthogonal projection onto the span of the given (orthonormal) columns."""
    if columns.size == 0:
        return Projection(np.zeros((context.dim, context.dim), dtype=complex), context)
    q = np.asarray(columns, dtype=complex)
    return Projection(hermitize(q @ q.conj().T), context)


def loewner_leq(a, b, tol: float = PSD_TOL) -> bool:
    """a <= b in the Loewner order: min eigenvalue of b - a >= -tol * scale."""
    am, bm = _as_matrix(a), _as_matrix(b)
    if am.shape != bm.shape:
        raise ValueError("dimension mismatch in Loewner comparison")
    scale = max(1.0, op_norm(am), op_norm(bm))
    return loewner_margin(am, bm) >= -tol * scale


def loewner_margin(a, b) -> float:
    """Min eigenvalue of b - a (negative means the order fails by that much)."""
    diff = hermitize(_as_matrix(b) - _as_matrix(a))
    return float(np.linalg.eigvalsh(diff)[0])


def is_psd(a, tol: float = PSD_TOL) -> bool:
    am = _as_matrix(a)
    scale = max(1.0, op_norm(am))
    return float(np.linalg.eigvalsh(hermitize(am))[0]) >= -tol * scale


def func_calc(a, f, context: AlgebraContext | None = None) -> HermitianOperator:
    """Apply a real scalar function to a Hermitian matrix by the spectral theorem.

    `f` is applied to the eigenvalue vector; the result is U f(L) U*.  Exact on
    diagonal inputs up to eigensolver roundoff.
    """
    ctx = context or getattr(a, "context", None)
    if ctx is None:
        raise ValueError("an AlgebraContext is required")
    x = hermitize(_as_matrix(a))
    w, u = np.linalg.eigh(x)
    fw = np.asarray(f(w), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise ValueError("function is undefined on part of the spectrum")
    return HermitianOperator(hermitize((u * fw) @ u.conj().T), ctx)


def fractional_power(a, p: float, tol: float = PSD_TOL) -> np.ndarray:
    """x^p for PSD x, eigenvalues in [-tol*scale, 0) clamped to 0 first.

    Raises when an eigenvalue is genuinely below -tol*scale, so roundoff is
    absorbed without masking non-positive inputs.
    """
    x = hermitize(_as_matrix(a))
    w, u = np.linalg.eigh(x)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    if w.size and w[0] < -tol * scale:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return hermitize((u * w**p) @ u.conj().T)


def spectral_projection(a, interval, context: AlgebraContext | None = None,
                        tol: float = PSD_TOL) -> Projection:
    """Projection onto eigenvectors of `a` with eigenvalue in the interval.

    The interval is a (lo, hi) pair, either end possibly infinite.  Boundary
    membership is resolved with a small tolerance band; open versus closed
    endpoints are indistinguishable under roundoff anyway.
    """
    ctx = context or getattr(a, "context", None)
    if ctx is None:
        raise ValueError("an AlgebraContext is required")
    lo, hi = interval
    x = hermitize(_as_matrix(a))
    w, u = np.linalg.eigh(x)
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
    band = tol * scale
    mask = (w >= lo - band) & (w <= hi + band)
    return projection_from_basis(u[:, mask], ctx)


def lp_norm(x, p: float, context: AlgebraContext | None = None) -> float:
    ctx = context or getattr(x, "context", None)
    if ctx is None:
        ctx = AlgebraContext(_as_matrix(x).shape[0])
    return ctx.lp_norm(x, p)


def positive_split(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Spectral positive/negative parts of a Hermitian matrix."""
    w, u = np.linalg.eigh(hermitize(h))
    pos = hermitize((u * np.clip(w, 0.0, None)) @ u.conj().T)
    neg = hermitize((u * np.clip(-w, 0.0, None)) @ u.conj().T)
    return pos, neg


def positive_four_split(x, context: AlgebraContext | None = None):
    """Write x = x0 - x1 + i(x2 - x3) with all parts PSD.

    The parts are the spectral positive/negative parts of the real and
    imaginary Hermitian components, so every ||x_j||_p <= ||x||_p.
    """
    ctx = context or getattr(x, "context", None)
    xm = _as_matrix(x)
    if ctx is None:
        ctx = AlgebraContext(xm.shape[0])
    re = hermitize(xm)
    im = (xm - xm.conj().T) / 2j
    x0, x1 = positive_split(re)
    x2, x3 = positive_split(hermitize(im))
    return tuple(HermitianOperator(m, ctx) for m in (x0, x1, x2, x3))


def projection_meet(es, tol: float = MEET_TOL) -> Projection:
    """Meet (range intersection) of projections, via the null space of sum(e_j^perp)."""
    es = list(es)
    if not es:
        raise ValueError("projection_meet of an empty list")
    ctx = es[0].context
    acc = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for e in es:
        if e.context.dim != ctx.dim:
            raise ValueError("projections live in different algebras")
        acc += ctx.identity() - e.entries
    return meet_from_perp_sum(acc, len(es), ctx, tol)


def meet_from_perp_sum(perp_sum: np.ndarray, count: int, context: AlgebraContext,
                       tol: float = MEET_TOL) -> Projection:
    """Meet of projections given the accumulated sum of their complements.

    A vector lies in every range exactly when the PSD accumulator kills it;
    the eigenvalue cutoff scales with the number of summands to absorb
    accumulated roundoff.
    """
    w, u = np.linalg.eigh(hermitize(perp_sum))
    keep = w <= tol * max(1, count)
    return projection_from_basis(u[:, keep], context)
