"""Search caps, read from ``DELASP_*`` environment variables at call time."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Limits:
    cap_atoms: int = 14
    cap_worlds: int = 6  # worlds of a belief model in the equilibrium check
    cap_preceq: int = 8
    subset_cap: int = 12  # answer-set count up to which sub-cells are tried

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")


def limits(**overrides) -> Limits:
    values = {}
    for f in fields(Limits):
        env = os.environ.get("DELASP_" + f.name.upper())
        if env:
            values[f.name] = int(env)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Limits(**values)
