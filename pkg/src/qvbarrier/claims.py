"""Claim descriptions shared by the Monte Carlo oracle, pricer, and CLI."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .charfun import Branch
from .errors import ConfigError
from .payoffs import BarrierSpec

__all__ = ["ClaimKind", "ClaimSpec"]


class ClaimKind(enum.Enum):
    EUROPEAN_POWEREXP = "european_powerexp"
    SBKO = "sbko"
    DBKO = "dbko"
    SKI_POWEREXP = "ski_powerexp"
    SKI_FRAC_QV = "ski_frac_qv"
    SKI_RATIO = "ski_ratio"
    REBATE = "rebate"


@dataclass(frozen=True)
class ClaimSpec:
    """Barrier-style claim on (X_T, <X>_T) or their post-passage increments.

    Orders (j, k) and frequencies (p, s) parametrize power-exponential
    payoffs; knock-in claims read them as the increment orders/frequencies.
    Barriers are log-price levels; maturity is the common expiry T.
    """

    kind: ClaimKind
    x0: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    j: int = 0
    k: int = 0
    p: complex = 0.0 + 0.0j
    s: complex = 0.0 + 0.0j
    r: Optional[float] = None
    eps: Optional[float] = None
    maturity: float = 1.0
    branch: Branch = Branch.PLUS

    def __post_init__(self):
        k = self.kind
        if self.maturity <= 0:
            raise ConfigError("maturity must be positive")
        if self.j < 0 or self.k < 0:
            raise ConfigError("orders must be non-negative")
        if k is ClaimKind.EUROPEAN_POWEREXP:
            return
        if k is ClaimKind.DBKO:
            if self.lower is None or self.upper is None:
                raise ConfigError("double knock-out needs both barriers")
        else:
            if (self.lower is None) == (self.upper is None):
                raise ConfigError(f"{k.value} needs exactly one barrier")
        try:
            self.barriers()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        has_upper = self.upper is not None
        if k is ClaimKind.SKI_FRAC_QV:
            if self.r is None or not 0.0 < self.r < 1.0:
                raise ConfigError("fractional QV claim needs 0 < r < 1")
            if has_upper:
                raise ConfigError("fractional QV claim supports lower barriers only")
        if k is ClaimKind.SKI_RATIO:
            if self.r is None or self.r <= 0.0:
                raise ConfigError("ratio claim needs r > 0")
            if self.eps is None or self.eps <= 0.0:
                raise ConfigError("ratio claim needs eps > 0")
            if has_upper:
                raise ConfigError("ratio claim supports lower barriers only")
        if k is ClaimKind.REBATE and abs(self.s + 0.125j) < 1e-12:
            raise ConfigError("rebate claim is singular at s = -i/8")

    def barriers(self) -> BarrierSpec:
        return BarrierSpec(x0=self.x0, lower=self.lower, upper=self.upper)

    @property
    def barrier_level(self) -> float:
        if self.kind is ClaimKind.DBKO:
            raise ValueError("double-barrier claim has two levels")
        return self.lower if self.lower is not None else self.upper

    @property
    def barrier_side(self) -> str:
        return "lower" if self.lower is not None else "upper"
