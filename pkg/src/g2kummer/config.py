"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class RunConfig:
    """Knobs for a reproducible run.

    Every output file embeds ``config_hash()`` so that result sets can be
    traced back to the exact configuration that produced them.
    """

    precision_bits: int = 256
    target_error: float = 1e-8
    delta: float = 0.25
    T: float = 1.0
    e_max: int = 4
    s_max: int = 200
    theta_enabled: bool = True
    output_dir: str = "results"
    seed: int = 0

    def __post_init__(self):
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be >= 53")
        for name in ("target_error", "delta", "T"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.e_max < 1 or self.s_max < 1:
            raise ValueError("search box must be nonempty")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
