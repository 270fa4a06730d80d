"""JSON file formats for matrices, operators, weight sequences and reports."""

from __future__ import annotations

import csv
import json

import numpy as np

from .algebra import AlgebraContext
from .dsop import DSMap
from .weights import TrigPolynomial, WeightSequence, trig_weight_sequence


class FormatError(ValueError):
    """Raised when an input file does not parse against its schema."""


def _complex_out(z: complex):
    z = complex(z)
    return z.real if z.imag == 0.0 else [z.real, z.imag]


def _complex_in(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise FormatError(f"cannot parse complex value from {v!r}")


def matrix_to_dict(m: np.ndarray, tau=None) -> dict:
    m = np.asarray(m, dtype=complex)
    out = {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}
    if tau is not None:
        out["tau"] = list(map(float, tau))
    return out


def matrix_from_dict(doc: dict):
    try:
        dim = int(doc["dim"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad matrix document: {exc}") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise FormatError(f"matrix arrays do not match dim {dim}")
    ctx = AlgebraContext(dim, np.asarray(doc["tau"], dtype=float)
                         if "tau" in doc else None)
    return re + 1j * im, ctx


def save_matrix(path, m, tau=None):
    with open(path, "w") as fh:
        json.dump(matrix_to_dict(m, tau), fh)


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_dict(json.load(fh))


def operator_to_dict(phi: DSMap) -> dict:
    if phi.kind == "kraus":
        return {"kind": "kraus",
                "ops": [matrix_to_dict(a) for a in phi.payload]}
    if phi.kind == "unitary":
        return {"kind": "unitary", **matrix_to_dict(phi.payload)}
    if phi.kind == "stochastic":
        return {"kind": "stochastic", "p": np.asarray(phi.payload).tolist()}
    if phi.kind == "permutation":
        return {"kind": "permutation", "perm": np.asarray(phi.payload).tolist()}
    raise FormatError(f"operator kind {phi.kind!r} has no file representation")


def operator_from_dict(doc: dict, context: AlgebraContext | None = None) -> DSMap:
    try:
        kind = doc["kind"]
        if kind == "kraus":
            ops = [matrix_from_dict(d)[0] for d in doc["ops"]]
            ctx = context or AlgebraContext(ops[0].shape[0])
            return DSMap.kraus(ops, ctx)
        if kind == "unitary":
            u, ctx = matrix_from_dict(doc)
            return DSMap.unitary(u, context or ctx)
        if kind == "stochastic":
            p = np.asarray(doc["p"], dtype=float)
            ctx = context or AlgebraContext(p.shape[0])
            return DSMap.stochastic(p, ctx)
        if kind == "permutation":
            perm = list(doc["perm"])
            ctx = context or AlgebraContext(len(perm))
            return DSMap.permutation(perm, ctx)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"bad operator document: {exc}") from exc
    raise FormatError(f"unknown operator kind {doc.get('kind')!r}")


def save_operator(path, phi: DSMap):
    with open(path, "w") as fh:
        json.dump(operator_to_dict(phi), fh)


def load_operator(path, context: AlgebraContext | None = None) -> DSMap:
    with open(path) as fh:
        return operator_from_dict(json.load(fh), context)


def sequence_to_dict(alpha: WeightSequence) -> dict:
    return {
        "d": alpha.d,
        "horizon": list(alpha.horizon),
        "values": [_complex_out(z) for z in alpha.values.reshape(-1)],
        "order": "row-major",
    }


def sequence_from_dict(doc: dict) -> WeightSequence:
    try:
        kind = doc.get("kind", "values")
        if kind == "values" or "values" in doc and "kind" not in doc:
            d = int(doc["d"])
            horizon = tuple(int(h) for h in doc["horizon"])
            if len(horizon) != d:
                raise FormatError("horizon length does not match d")
            if doc.get("order", "row-major") != "row-major":
                raise FormatError("only row-major sequence files are supported")
            flat = np.array([_complex_in(v) for v in doc["values"]])
            return WeightSequence(flat.reshape(horizon), label=doc.get("label"))
        if kind == "trig":
            terms = [(_complex_in(t["r"]), tuple(_complex_in(l) for l in t["lambda"]))
                     for t in doc["terms"]]
            horizon = tuple(int(h) for h in doc["horizon"])
            return trig_weight_sequence(TrigPolynomial(terms), horizon,
                                        label=doc.get("label"))
        if kind == "rotation":
            from .weights import besicovitch_generate
            mu = _complex_in(doc["mu"])
            lam = _complex_in(doc["lambda"])
            coeffs = [(int(j), _complex_in(c)) for j, c in doc["coeffs"]]
            seq, _ = besicovitch_generate(coeffs, mu, lam, int(doc["length"]))
            return seq
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad sequence document: {exc}") from exc
    raise FormatError(f"unknown sequence kind {doc.get('kind')!r}")


def save_sequence(path, alpha: WeightSequence):
    with open(path, "w") as fh:
        json.dump(sequence_to_dict(alpha), fh)


def load_sequence(path) -> WeightSequence:
    with open(path) as fh:
        return sequence_from_dict(json.load(fh))


def weight_map_from_dict(doc: dict):
    try:
        d = int(doc["d"])
        entries = {tuple(int(v) for v in key): float(val)
                   for key, val in doc["entries"]}
        return d, int(doc["H"]), entries
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad weight map document: {exc}") from exc


def load_weight_map(path):
    with open(path) as fh:
        return weight_map_from_dict(json.load(fh))


def save_weight_map(path, d: int, H: int, entries: dict):
    doc = {"d": d, "H": H,
           "entries": [[list(k), float(v)] for k, v in sorted(entries.items())]}
    with open(path, "w") as fh:
        json.dump(doc, fh)


def write_average_csv(path, results, p: float, ctx: AlgebraContext):
    """Columns: n_1..n_d, norm_inf, norm_p, normalization."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        d = len(results[0].n) if results else 1
        writer.writerow([f"n{i + 1}" for i in range(d)]
                        + ["norm_inf", "norm_p", "normalization"])
        for r in results:
            writer.writerow(list(r.n)
                            + [repr(ctx.lp_norm(r.value, np.inf)),
                               repr(ctx.lp_norm(r.value, p)),
                               repr(r.normalization)])


def write_tail_csv(path, tail_profile):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        d = len(tail_profile[0][0]) if tail_profile else 1
        writer.writerow([f"n{i + 1}" for i in range(d)] + ["compressed_distance"])
        for n, v in tail_profile:
            writer.writerow(list(n) + [repr(float(v))])
