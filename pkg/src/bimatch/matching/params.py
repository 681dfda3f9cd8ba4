from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional


class Method(str, enum.Enum):
    """Match shapes: one-to-one, one-to-two (before/after), or either."""

    ONE_ONE = "1-1"
    ONE_TWO = "1-2"
    ONE_ONE_OR_TWO = "1-1/2"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        aliases = {"1-1": cls.ONE_ONE, "11": cls.ONE_ONE, "1-2": cls.ONE_TWO, "12": cls.ONE_TWO,
                   "1-1/2": cls.ONE_ONE_OR_TWO, "1-12": cls.ONE_ONE_OR_TWO, "112": cls.ONE_ONE_OR_TWO}
        try:
            return aliases[str(value).strip()]
        except KeyError:
            raise ValueError(f"unknown matching method {value!r}") from None

    @property
    def allows_pairs(self) -> bool:
        return self is not Method.ONE_TWO

    @property
    def allows_triples(self) -> bool:
        return self is not Method.ONE_ONE

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TuningParams:
    """Balance tolerances for one matching run.

    Attributes:
        delta: cap on the absolute mean time difference of matches.
        delta_prime: cap on each covariate's absolute mean imbalance, in the
            units of the balance covariate set (pooled SDs when standardized).
            ``inf`` disables the covariate constraints.
        eps: cap on the time distance between an exposed period and each of
            its matched unexposed periods (inclusive).
        delta_dprime: optional cap on every single match's covariate gap.
        ell, kpow: optional auxiliary expansion (interval length, order).
        adjust: ``False`` drops the mean covariate constraints, keeping time.
    """

    delta: float = 2.0
    delta_prime: float = 0.05
    eps: int = 6
    delta_dprime: Optional[float] = None
    ell: Optional[float] = None
    kpow: Optional[int] = None
    adjust: bool = True

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError("delta must be nonnegative")
        if not self.delta_prime >= 0:
            raise ValueError("delta_prime must be nonnegative")
        if int(self.eps) != self.eps or self.eps < 0:
            raise ValueError("eps must be a nonnegative integer")
        object.__setattr__(self, "eps", int(self.eps))
        if self.delta_dprime is not None and not self.delta_dprime >= 0:
            raise ValueError("delta_dprime must be nonnegative")
        if self.ell is not None:
            if not self.ell > 0:
                raise ValueError("ell must be positive")
            if self.kpow is None or self.kpow < 2:
                raise ValueError("kpow >= 2 is required when ell is set")
        elif self.kpow is not None:
            raise ValueError("kpow requires ell")

    @property
    def constrains_covariates(self) -> bool:
        return self.adjust and not math.isinf(self.delta_prime)

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(out["delta_prime"]):
            out["delta_prime"] = "inf"
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TuningParams":
        d = dict(d)
        if d.get("delta_prime") == "inf":
            d["delta_prime"] = math.inf
        return cls(**d)
