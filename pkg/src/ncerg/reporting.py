"""Certificate reports: the outcome record of every inequality check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Projection

CERT_TOL = 1e-8


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(val) for k, val in v.items()}
    return v


@dataclass
class CertificateReport:
    """Outcome of one certificate or inequality check.

    `passed` always equals `achieved <= claimed_bound + tolerance`; use
    `from_bounds` so the invariant cannot drift from the fields.
    """

    claim: str
    claimed_bound: float
    achieved: float
    tolerance: float
    passed: bool
    witness: Projection | None = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_bounds(cls, claim: str, claimed_bound: float, achieved: float,
                    tolerance: float, witness: Projection | None = None,
                    **metadata) -> "CertificateReport":
        return cls(
            claim=claim,
            claimed_bound=float(claimed_bound),
            achieved=float(achieved),
            tolerance=float(tolerance),
            passed=bool(achieved <= claimed_bound + tolerance),
            witness=witness,
            metadata=metadata,
        )

    def to_json_dict(self) -> dict:
        """Fixed field order so report files are byte-reproducible."""
        out = {
            "claim": self.claim,
            "claimed_bound": _jsonable(self.claimed_bound),
            "achieved": _jsonable(self.achieved),
            "tolerance": _jsonable(self.tolerance),
            "passed": self.passed,
        }
        if self.witness is not None:
            out["witness"] = {
                "rank": self.witness.rank(),
                "trace": _jsonable(self.witness.trace()),
                "trace_perp": _jsonable(self.witness.trace_perp()),
            }
        out["metadata"] = {k: _jsonable(self.metadata[k]) for k in sorted(self.metadata)}
        return out
