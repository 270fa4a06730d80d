"""Seeded random fixtures: matrices, channels, commuting tuples.

Everything takes an explicit numpy Generator so checks stay reproducible.
"""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraContext, hermitize, op_norm
from .dsop import DSMap, DSTuple


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, ctx: AlgebraContext, scale: float = 1.0) -> np.ndarray:
    g = complex_gaussian(rng, (ctx.dim, ctx.dim))
    h = hermitize(g)
    return scale * h / max(1.0, op_norm(h))


def random_psd(rng, ctx: AlgebraContext, scale: float = 1.0,
               rank: int | None = None) -> np.ndarray:
    r = ctx.dim if rank is None else rank
    g = complex_gaussian(rng, (ctx.dim, r))
    x = g @ g.conj().T
    return scale * x / max(1e-12, op_norm(x))

def random_unit_vector(rng, n: int) -> np.ndarray:
    v = complex_gaussian(rng, n)
    return v / np.linalg.norm(v)


def haar_unitary(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(complex_gaussian(rng, (n, n)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_projection(rng, ctx: AlgebraContext, rank: int) -> np.ndarray:
    u = haar_unitary(rng, ctx.dim)
    return u[:, :rank] @ u[:, :rank].conj().T


def random_kraus_map(rng, ctx: AlgebraContext, n_ops: int = 2,
                     unital: bool = False) -> DSMap:
    """Random Kraus map, normalized doubly substochastic (or exactly unital)."""
    ops = [complex_gaussian(rng, (ctx.dim, ctx.dim)) for _ in range(n_ops)]
    if unital:
        s = sum(a @ a.conj().T for a in ops)
        w, u = np.linalg.eigh(hermitize(s))
        root_inv = (u * w**-0.5) @ u.conj().T
        ops = [root_inv @ a for a in ops]
    else:
        s = max(op_norm(sum(a.conj().T @ a for a in ops)),
                op_norm(sum(a @ a.conj().T for a in ops)))
        ops = [a / np.sqrt(s) for a in ops]
    return DSMap.kraus(ops, ctx)


def random_doubly_substochastic(rng, n: int, strict: float = 1.0) -> np.ndarray:
    """Convex mix of permutation matrices, optionally shrunk below 1."""
    weights = rng.dirichlet(np.ones(3))
    m = np.zeros((n, n))
    for w in weights:
        p = rng.permutation(n)
        m[np.arange(n), p] += w
    return strict * m


def random_ds_map(rng, ctx: AlgebraContext, kind: str | None = None) -> DSMap:
    kind = kind or rng.choice(["kraus", "unitary", "stochastic", "permutation"])
    if kind == "kraus":
        return random_kraus_map(rng, ctx, n_ops=int(rng.integers(1, 4)))
    if kind == "unitary":
        return DSMap.unitary(haar_unitary(rng, ctx.dim), ctx)
    if kind == "stochastic":
        return DSMap.stochastic(random_doubly_substochastic(rng, ctx.dim), ctx)
    if kind == "permutation":
        return DSMap.permutation(rng.permutation(ctx.dim), ctx)
    raise ValueError(f"unknown kind {kind!r}")


def commuting_unitary_tuple(rng, ctx: AlgebraContext, d: int) -> DSTuple:
    """Conjugations by unitaries sharing one Haar eigenbasis."""
    v = haar_unitary(rng, ctx.dim)
    maps = []
    for _ in range(d):
        phases = np.exp(2j * np.pi * rng.random(ctx.dim))
        maps.append(DSMap.unitary((v * phases) @ v.conj().T, ctx))
    return DSTuple(maps, commuting=True)


def cyclic_permutation_tuple(ctx: AlgebraContext, powers) -> DSTuple:
    """Powers of the full cycle; they commute by construction."""
    n = ctx.dim
    cycle = np.roll(np.arange(n), 1)
    maps = []
    for k in powers:
        p = np.arange(n)
        for _ in range(k % n):
            p = cycle[p]
        maps.append(DSMap.permutation(p, ctx))
    return DSTuple(maps, commuting=True)


def circulant_stochastic_tuple(rng, ctx: AlgebraContext, d: int) -> DSTuple:
    """Diagonal actions by random circulant doubly stochastic matrices."""
    n = ctx.dim
    maps = []
    for _ in range(d):
        row = rng.dirichlet(np.ones(n))
        m = np.empty((n, n))
        for i in range(n):
            m[i] = np.roll(row, i)
        maps.append(DSMap.stochastic(m, ctx))
    return DSTuple(maps, commuting=True)


def random_commuting_tuple(rng, ctx: AlgebraContext, d: int,
                           kind: str | None = None) -> DSTuple:
    kind = kind or rng.choice(["unitary", "permutation", "stochastic"])
    if kind == "unitary":
        return commuting_unitary_tuple(rng, ctx, d)
    if kind == "permutation":
        powers = [int(rng.integers(1, ctx.dim)) for _ in range(d)]
        return cyclic_permutation_tuple(ctx, powers)
    if kind == "stochastic":
        return circulant_stochastic_tuple(rng, ctx, d)
    raise ValueError(f"unknown kind {kind!r}")


def random_nonneg_weights(rng, shape, sparsity: float = 0.0):
    """Entrywise nonnegative weights, optionally with a zeroed fraction."""
    from .weights import WeightSequence

    vals = rng.random(shape) * 2.0
    if sparsity > 0:
        vals = vals * (rng.random(shape) >= sparsity)
    return WeightSequence(vals.astype(complex))


def random_complex_weights(rng, shape):
    from .weights import WeightSequence

    vals = complex_gaussian(rng, shape)
    return WeightSequence(vals)
