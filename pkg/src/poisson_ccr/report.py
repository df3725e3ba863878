"""Check rows shared by the verification routines and the CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass

EXACT_RTOL = 1e-12
MC_Z = 4.0


@dataclass(frozen=True)
class CheckRow:
    check_id: str
    kind: str  # "exact" | "mc"
    value: complex
    target: complex
    stderr: float = 0.0
    z: float = 0.0
    passed: bool = True

    @classmethod
    def exact(cls, check_id: str, value, target, rtol: float = EXACT_RTOL) -> "CheckRow":
        value, target = complex(value), complex(target)
        err = abs(value - target)
        ok = math.isfinite(err) and err <= rtol * max(1.0, abs(target))
        return cls(check_id, "exact", value, target, 0.0, 0.0, ok)

    @classmethod
    def mc(cls, check_id: str, estimate, target, k: float = MC_Z) -> "CheckRow":
        z = estimate.zscore(target)
        return cls(check_id, "mc", complex(estimate.mean), complex(target), estimate.stderr, z, z <= k)
