"""Option contract description shared by both engines."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

KINDS = ("put", "call")
STYLES = ("american", "european")

# Absolute tolerance, in units of the reference scale, for "value equals payoff".
EXERCISE_RTOL = 2.0 ** -40


@dataclass(frozen=True)
class OptionSpec:
    kind: str
    style: str
    E: float
    S0: float
    T: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.style not in STYLES:
            raise DomainError(f"style must be one of {STYLES}, got {self.style!r}")
        # E = 0 is admitted as the degenerate zero-payoff put
        if not self.E >= 0:
            raise DomainError(f"strike E must be nonnegative, got {self.E!r}")
        if not self.S0 > 0:
            raise DomainError(f"spot S0 must be positive, got {self.S0!r}")
        if not self.T > 0:
            raise DomainError(f"maturity T must be positive, got {self.T!r}")

    @property
    def american(self) -> bool:
        return self.style == "american"

    def payoff(self, S: np.ndarray) -> np.ndarray:
        if self.kind == "put":
            return np.maximum(self.E - S, 0.0)
        return np.maximum(S - self.E, 0.0)

    def exercise_tol(self) -> float:
        """Tolerance tau used when classifying nodes as exercised."""
        scale = self.E if self.kind == "put" else self.S0
        return EXERCISE_RTOL * scale

    def scaled(self, lam: float) -> "OptionSpec":
        return replace(self, E=lam * self.E, S0=lam * self.S0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "style": self.style, "S0": self.S0, "E": self.E, "T": self.T}
