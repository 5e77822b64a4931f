"""Exception types shared across the package."""

import numpy as np


class ConductError(Exception):
    """Base class for errors raised by this package."""


class DegenerateDenominator(ConductError, ArithmeticError):
    """Equilibrium denominator (1+theta)(alpha1+alpha2*zr)+gamma1 is (near) zero."""


class RankDeficient(ConductError, np.linalg.LinAlgError):
    """A regression design is exactly or nearly collinear."""


class ThetaUndefined(ConductError, ArithmeticError):
    """The demand rotation slope estimate is too close to zero to recover theta."""


class InvalidConfig(ConductError, ValueError):
    """A run configuration is incomplete or inconsistent."""
