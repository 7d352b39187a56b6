"""Weir hydraulics: the broad-crest discharge relation and empirical
discharge-coefficient formulas for streamlined weirs.

All quantities are SI. ``g`` defaults to 9.81 m/s^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

G = 9.81


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0 or not math.isfinite(value):
            raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _require_non_negative(**values: float) -> None:
    for name, value in values.items():
        if not value >= 0 or not math.isfinite(value):
            raise DomainError(f"{name} must be non-negative and finite, got {value!r}")


@dataclass(frozen=True)
class FlowSpec:
    """Flow state over a weir; ``H1`` is upstream head plus velocity head."""

    Q: float
    B: float
    h1: float
    v: float = 0.0
    g: float = G

    def __post_init__(self):
        _require_positive(B=self.B, g=self.g, h1=self.h1)
        _require_non_negative(Q=self.Q, v=self.v)

    @classmethod
    def from_cd(cls, cd: float, B: float, h1: float, v: float = 0.0, g: float = G) -> "FlowSpec":
        return cls(Q=discharge_from_cd(cd, B, total_head(h1, v, g), g), B=B, h1=h1, v=v, g=g)

    @property
    def H1(self) -> float:
        return total_head(self.h1, self.v, self.g)

    @property
    def cd(self) -> float:
        return cd_from_discharge(self.Q, self.B, self.H1, self.g)


@dataclass(frozen=True)
class CarolloInputs:
    """Geometry and stage variables of the Carollo-Ferro stage-discharge fit.

    ``b`` is the channel width of the stage variable; ``W1`` is a raw length
    with no physical interpretation imposed.
    """

    h1: float
    W: float
    L: float
    W1: float
    b: float | None = None

    def __post_init__(self):
        _require_positive(h1=self.h1, W=self.W, L=self.L, W1=self.W1)
        if self.b is not None:
            _require_positive(b=self.b)

    def stage(self) -> float:
        return stage_discharge_A(self.h1, self.W, self.L, self.W1)

    def cd(self) -> float:
        return cd_carollo(self.h1, self.W, self.L, self.W1)

    def a(self) -> float:
        return stage_coefficient_a(self.cd())


def total_head(h1: float, v: float = 0.0, g: float = G) -> float:
    """Upstream head plus the velocity head ``v**2 / (2 g)``."""
    _require_positive(h1=h1, g=g)
    _require_non_negative(v=v)
    return h1 + v * v / (2.0 * g)


def _weir_constant(B: float, H1: float, g: float) -> float:
    return (2.0 / 3.0) * B * math.sqrt(2.0 * g / 3.0) * H1**1.5


def discharge_from_cd(cd: float, B: float, H1: float, g: float = G) -> float:
    """Q = (2/3) Cd B sqrt(2g/3) H1^(3/2)."""
    _require_positive(B=B, H1=H1, g=g)
    _require_non_negative(cd=cd)
    return cd * _weir_constant(B, H1, g)


def cd_from_discharge(Q: float, B: float, H1: float, g: float = G) -> float:
    """Closed-form inverse of :func:`discharge_from_cd`."""
    _require_positive(B=B, H1=H1, g=g)
    _require_non_negative(Q=Q)
    return Q / _weir_constant(B, H1, g)


def cd_bagheri(lam: float, h1: float, L: float, W: float) -> float:
    """Bagheri & Kabiri-Samani fit: 1.4 lam^0.05 ((h1/L)(h1/W))^0.1."""
    _require_positive(lam=lam, h1=h1, L=L, W=W)
    return 1.4 * lam**0.05 * ((h1 / L) * (h1 / W)) ** 0.1


def stage_variable_A(Q: float, b: float, W: float, g: float = G) -> float:
    """Dimensionless stage variable Q^(2/3) / (g^(1/3) b^(2/3) W)."""
    _require_non_negative(Q=Q)
    _require_positive(b=b, W=W, g=g)
    return Q ** (2.0 / 3.0) / (g ** (1.0 / 3.0) * b ** (2.0 / 3.0) * W)


def stage_coefficient_a(cd: float) -> float:
    """a = (2/3) Cd^(2/3), linking the stage variable to h1/W."""
    _require_non_negative(cd=cd)
    return (2.0 / 3.0) * cd ** (2.0 / 3.0)


def stage_discharge_A(h1: float, W: float, L: float, W1: float) -> float:
    """Carollo-Ferro stage-discharge fit for the stage variable."""
    _require_positive(h1=h1, W=W, L=L, W1=W1)
    return 0.8546 * (h1 / W) ** 1.1243 * (L / W) ** -0.1012 * (W1 / W) ** 0.0412


def cd_carollo(h1: float, W: float, L: float, W1: float) -> float:
    """Discharge coefficient implied by the Carollo-Ferro stage fit."""
    A = stage_discharge_A(h1, W, L, W1)
    return (3.0 * W / (2.0 * h1) * A) ** 1.5
