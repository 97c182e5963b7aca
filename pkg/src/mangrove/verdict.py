"""Tri-state answers for relations that quantify over infinite node sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

PROVEN = "Proven"
REFUTED = "Refuted"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Any = None
    detail: str = ""
    samples: int = 0
    seed: Any = None

    @property
    def proven(self):
        return self.status == PROVEN

    @property
    def refuted(self):
        return self.status == REFUTED

    @property
    def unknown(self):
        return self.status == UNKNOWN

    def to_doc(self):
        doc = {"status": self.status, "detail": self.detail}
        if self.witness is not None:
            doc["witness"] = _plain(self.witness)
        if self.status == UNKNOWN:
            doc["samples"] = self.samples
            doc["seed"] = self.seed
        return doc

    def __str__(self):
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.status}{tail}"


def proven(detail=""):
    return Verdict(PROVEN, detail=detail)


def refuted(witness=None, detail=""):
    return Verdict(REFUTED, witness=witness, detail=detail)


def unknown(samples=0, seed=None, detail=""):
    return Verdict(UNKNOWN, detail=detail, samples=samples, seed=seed)


def _plain(obj):
    """Turn ordinals, nodes and containers into JSON-friendly values."""
    from .kord import Ord, PiecewiseShift, fmt
    if isinstance(obj, Ord):
        return fmt(obj)
    if isinstance(obj, PiecewiseShift):
        return obj.to_doc()
    if hasattr(obj, "to_doc"):
        return obj.to_doc()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj
