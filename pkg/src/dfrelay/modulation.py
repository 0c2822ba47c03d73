"""Constellation descriptors for square M-QAM and M-PSK."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["Modulation"]


@dataclass(frozen=True)
class Modulation:
    """A constellation family and order.

    Parameters
    ----------
    family : {"QAM", "PSK"}
    order : int
        Number of points M, a power of two >= 4; square for QAM.
    """

    family: str = "QAM"
    order: int = 4

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in ("QAM", "PSK"):
            raise DomainError(f"unknown modulation family {self.family!r}")
        M = self.order
        if M < 4 or M & (M - 1):
            raise DomainError(f"order must be a power of two >= 4, got {M}")
        if fam == "QAM" and math.isqrt(M) ** 2 != M:
            raise DomainError(f"QAM order must be a perfect square, got {M}")

    @classmethod
    def qam(cls, order: int = 4) -> "Modulation":
        return cls("QAM", order)

    @classmethod
    def psk(cls, order: int = 4) -> "Modulation":
        return cls("PSK", order)

    @property
    def is_qam(self) -> bool:
        return self.family == "QAM"

    @property
    def bits(self) -> int:
        """Bits per symbol, log2(M)."""
        return int(round(math.log2(self.order)))

    @property
    def g(self) -> float:
        """SNR scaling of the conditional error probability."""
        if self.is_qam:
            return 1.5 / (self.order - 1)
        return math.sin(math.pi / self.order) ** 2

    @property
    def papr(self) -> float:
        """Peak-to-average power ratio of the constellation."""
        if self.is_qam:
            r = math.sqrt(self.order)
            return 3.0 * (r - 1.0) / (r + 1.0)
        return 1.0

    def __str__(self):
        return f"{self.order}-{self.family}"
