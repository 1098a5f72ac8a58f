"""Dimensional constants that the theory asserts exist but never pins down.

The cube-diameter constant, the distortion-bound prefactor and the
ring-crossing constant all "depend only on the dimension"; no numeric value
is available.  They live here with a provenance flag so every consumer is
explicit about using the conventional value 1, and so acceptance checks are
forced to compare ratios or exponents instead of absolute levels.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = ["ConstantsConfig", "DEFAULT_CONSTANTS"]

UNPINNED = "unpinned-by-theory"


@dataclass(frozen=True)
class ConstantsConfig:
    alpha_k: float = 1.0   # cube-diameter constant, depends only on k
    alpha_n: float = 1.0   # distortion-bound prefactor
    c_n: float = 1.0       # crossing-family log lower-bound constant
    gamma_n: float = 1.0   # Holder-bound prefactor
    beta_n: float = 1.0    # Holder-bound exponent prefactor
    provenance: str = UNPINNED

    def gamma_km(self, k: int, m: int) -> float:
        """Area-bound constant (m * alpha_k)**k."""
        return (m * self.alpha_k) ** k

    def with_overrides(self, **kwargs) -> "ConstantsConfig":
        flagged = {k: v for k, v in kwargs.items() if v is not None}
        if not flagged:
            return self
        return replace(self, provenance="user-overridden", **flagged)


DEFAULT_CONSTANTS = ConstantsConfig()
