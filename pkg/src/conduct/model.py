"""Linear demand / marginal-cost market model.

Demand:   P = a0 - (a1 + a2*zr)*Q + a3*y + eps_d
Cost:     MC = g0 + g1*Q + g2*w + g3*r + eps_c
Supply:   P = g0 + theta*a2*zr*Q + (theta*a1 + g1)*Q + g2*w + g3*r + eps_c

All functions are pure and broadcast over numpy arrays, so a draw may hold
scalars (one market) or equal-length arrays (many markets).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .exceptions import DegenerateDenominator

DENOMINATOR_TOL = 1e-12


@dataclass(frozen=True)
class StructuralParams:
    """Model coefficients plus the common standard deviation of both errors."""

    alpha0: float = 10.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha3: float = 1.0
    gamma0: float = 1.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    gamma3: float = 1.0
    theta: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    def replace(self, **changes) -> StructuralParams:
        return StructuralParams(**{**asdict(self), **changes})

    def truth(self) -> dict[str, float]:
        """The nine structural parameters keyed by name (sigma excluded)."""
        d = asdict(self)
        d.pop("sigma")
        return d


BASELINE_PARAMS = StructuralParams()

_DRAW_FIELDS = ("y", "zr", "w", "r", "h", "k", "eps_d", "eps_c")


@dataclass(frozen=True)
class ExogenousDraw:
    """Exogenous shifters, instruments and errors for one market (or a vector of markets)."""

    y: float
    zr: float
    w: float
    r: float
    h: float
    k: float
    eps_d: float
    eps_c: float

    def __post_init__(self):
        for name in _DRAW_FIELDS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"draw field {name} is not finite")


@dataclass(frozen=True)
class MarketObservation:
    """One market's equilibrium record."""

    y: float
    zr: float
    w: float
    r: float
    h: float
    k: float
    eps_d: float
    eps_c: float
    q: float
    p: float

    @property
    def draw(self) -> ExogenousDraw:
        return ExogenousDraw(*(getattr(self, name) for name in _DRAW_FIELDS))


def equilibrium_denominator(params: StructuralParams, zr):
    return (1.0 + params.theta) * (params.alpha1 + params.alpha2 * zr) + params.gamma1


def equilibrium_quantity(params: StructuralParams, draw: ExogenousDraw):
    """Closed-form market-clearing aggregate quantity.

    Raises
    ------
    DegenerateDenominator
        If ``|(1+theta)(alpha1+alpha2*zr)+gamma1| <= 1e-12`` for any market.
    """
    den = equilibrium_denominator(params, draw.zr)
    if np.any(np.abs(den) <= DENOMINATOR_TOL):
        raise DegenerateDenominator(
            "equilibrium denominator (1+theta)(alpha1+alpha2*zr)+gamma1 is zero"
        )
    num = (
        params.alpha0
        + params.alpha3 * draw.y
        - params.gamma0
        - params.gamma2 * draw.w
        - params.gamma3 * draw.r
        + draw.eps_d
        - draw.eps_c
    )
    return num / den


def demand_price(params: StructuralParams, q, draw: ExogenousDraw):
    """Inverse demand evaluated at quantity ``q``."""
    return (
        params.alpha0
        - (params.alpha1 + params.alpha2 * draw.zr) * q
        + params.alpha3 * draw.y
        + draw.eps_d
    )


def supply_price(params: StructuralParams, q, draw: ExogenousDraw):
    """Supply relation (marginal cost plus the conduct markup) at quantity ``q``."""
    return (
        params.gamma0
        + params.theta * params.alpha2 * draw.zr * q
        + (params.theta * params.alpha1 + params.gamma1) * q
        + params.gamma2 * draw.w
        + params.gamma3 * draw.r
        + draw.eps_c
    )
