"""OLS and two-stage least squares for the demand and supply equations.

Both Q and the interaction zr*Q are endogenous. Each gets its own first-stage
regression on the same instrument matrix, then the second stage regresses the
response on the fitted columns. Recovering the structural supply parameters
uses the composite coefficients of the supply relation::

    coef(zr*Q) = theta * alpha2        coef(Q) = theta * alpha1 + gamma1
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import RankDeficient, ThetaUndefined

RANK_RTOL = 1e-10
WEAK_FIRST_STAGE_R2 = 1e-3
THETA_TOL = 1e-12

DEMAND_REGRESSORS = ("q", "zq", "y")
DEMAND_ENDOGENOUS = ("q", "zq")
DEMAND_INSTRUMENTS = ("zr", "h", "k")

SUPPLY_REGRESSORS = ("zq", "q", "w", "r")
SUPPLY_ENDOGENOUS = ("zq", "q")
SUPPLY_INSTRUMENTS = ("zr", "y")
# without a demand shifter the remaining excluded exogenous variables
PS_SUPPLY_INSTRUMENTS = ("zr", "h", "k")


@dataclass(frozen=True)
class RegressionSpec:
    """Names of the columns entering a (2SLS) regression.

    The intercept is implicit and always comes first. ``instruments`` are the
    excluded instruments; included exogenous regressors are added to the
    first stage automatically.
    """

    response: str
    regressors: tuple[str, ...]
    endogenous: tuple[str, ...] = ()
    instruments: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "endogenous", tuple(self.endogenous))
        object.__setattr__(self, "instruments", tuple(self.instruments))
        missing = set(self.endogenous) - set(self.regressors)
        if missing:
            raise ValueError(f"endogenous columns {sorted(missing)} are not regressors")

    @property
    def exogenous(self) -> tuple[str, ...]:
        return tuple(c for c in self.regressors if c not in self.endogenous)

    @property
    def order_condition(self) -> bool:
        return len(self.instruments) >= len(self.endogenous)


@dataclass(frozen=True)
class FitResult:
    """Point estimates and fit statistics of one regression.

    ``coefficients`` are aligned with ``names`` (``"const"`` first). For 2SLS
    ``r_squared`` uses structural residuals (original regressors) and can be
    negative.
    """

    coefficients: np.ndarray
    names: tuple[str, ...]
    r_squared: float
    condition_number: float
    first_stage_r_squared: tuple[float, ...] = ()
    weak_instrument: bool = False

    def __getitem__(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.coefficients.tolist()))


@dataclass(frozen=True)
class EstimateRecord:
    """Demand and supply fits of one dataset plus the recovered theta and gamma1."""

    demand: FitResult
    supply: FitResult
    theta_hat: float
    gamma1_hat: float
    weak_instrument: bool = field(default=False)

    @property
    def alpha_hat(self) -> tuple[float, float, float, float]:
        """(alpha0, alpha1, alpha2, alpha3) in the sign convention of the demand curve.

        alpha3 is 0 when Y was not a demand regressor.
        """
        d = self.demand
        alpha3 = d["y"] if "y" in d.names else 0.0
        return d["const"], -d["q"], -d["zq"], alpha3

    def structural(self) -> dict[str, float]:
        a0, a1, a2, a3 = self.alpha_hat
        s = self.supply
        return {
            "alpha0": a0,
            "alpha1": a1,
            "alpha2": a2,
            "alpha3": a3,
            "gamma0": s["const"],
            "gamma1": self.gamma1_hat,
            "gamma2": s["w"],
            "gamma3": s["r"],
            "theta": self.theta_hat,
        }


def _r_squared(response, residuals) -> float:
    centered = response - response.mean()
    sst = float(centered @ centered)
    ssr = float(residuals @ residuals)
    if sst == 0.0:
        return 1.0 if ssr == 0.0 else -np.inf
    return 1.0 - ssr / sst


def _svd_solve(design, response):
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    if s[0] == 0.0 or s[-1] / s[0] < RANK_RTOL:
        ratio = 0.0 if s[0] == 0.0 else s[-1] / s[0]
        raise RankDeficient(
            f"design is rank deficient: smallest/largest singular value = {ratio:.3e}"
        )
    return vt.T @ ((u.T @ response) / s), float(s[0] / s[-1])


def ols(design, response, names: Sequence[str] | None = None) -> FitResult:
    """Least squares via the SVD of ``design``.

    ``design`` is T x k and should already contain the intercept column.

    Raises
    ------
    RankDeficient
        If T <= k or the singular-value ratio is below 1e-10.
    """
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    t, k = design.shape
    if t <= k:
        raise RankDeficient(f"need more observations than regressors (T={t}, k={k})")
    coef, cond = _svd_solve(design, response)
    if names is None:
        names = tuple(f"x{i}" for i in range(k))
    return FitResult(
        coefficients=coef,
        names=tuple(names),
        r_squared=_r_squared(response, response - design @ coef),
        condition_number=cond,
    )


def _column(data: Mapping[str, np.ndarray], name: str) -> np.ndarray:
    return np.asarray(data[name], dtype=float)


def tsls(
    data: Mapping[str, np.ndarray],
    spec: RegressionSpec,
    *,
    single_first_stage: Mapping[str, tuple[str, str]] | None = None,
) -> FitResult:
    """Two-stage least squares with one first stage per endogenous regressor.

    Parameters
    ----------
    data : mapping
        Column name -> array; a :class:`~conduct.datagen.Dataset` works.
    spec : RegressionSpec
    single_first_stage : mapping, optional
        Alternative convention for interaction terms. Maps an endogenous
        interaction column to ``(exogenous, endogenous)``; instead of its own
        first stage, its fitted value is ``exogenous * fitted(endogenous)``.

    Raises
    ------
    RankDeficient
        When the order condition fails or either stage is collinear.
    """
    if not spec.order_condition:
        raise RankDeficient(
            f"under-identified: {len(spec.instruments)} excluded instruments for "
            f"{len(spec.endogenous)} endogenous regressors"
        )
    single_first_stage = dict(single_first_stage or {})
    y = _column(data, spec.response)
    n = len(y)
    const = np.ones(n)
    x = np.column_stack([const] + [_column(data, c) for c in spec.regressors])
    z = np.column_stack(
        [const] + [_column(data, c) for c in spec.exogenous] + [_column(data, c) for c in spec.instruments]
    )
    if n <= z.shape[1] or n <= x.shape[1]:
        raise RankDeficient(f"too few observations (T={n}) for the instrument set")

    # first stage: one SVD of Z serves every endogenous column
    u, s, vt = np.linalg.svd(z, full_matrices=False)
    if s[-1] / s[0] < RANK_RTOL:
        raise RankDeficient(f"first-stage design is rank deficient (ratio {s[-1] / s[0]:.3e})")
    fitted = {}
    first_r2 = []
    for name in spec.endogenous:
        if name in single_first_stage:
            continue
        col = _column(data, name)
        fitted[name] = u @ (u.T @ col)
        first_r2.append(_r_squared(col, col - fitted[name]))
    for name, (exog, endog) in single_first_stage.items():
        if endog not in fitted:
            raise ValueError(f"{endog!r} has no first stage to build {name!r} from")
        fitted[name] = _column(data, exog) * fitted[endog]
        col = _column(data, name)
        first_r2.insert(spec.endogenous.index(name), _r_squared(col, col - fitted[name]))

    x_hat = x.copy()
    for j, name in enumerate(spec.regressors, start=1):
        if name in fitted:
            x_hat[:, j] = fitted[name]
    coef, cond = _svd_solve(x_hat, y)
    return FitResult(
        coefficients=coef,
        names=("const",) + spec.regressors,
        r_squared=_r_squared(y, y - x @ coef),
        condition_number=cond,
        first_stage_r_squared=tuple(first_r2),
        weak_instrument=any(r2 < WEAK_FIRST_STAGE_R2 for r2 in first_r2),
    )


def demand_spec(include_shifter: bool = True) -> RegressionSpec:
    regressors = DEMAND_REGRESSORS if include_shifter else DEMAND_REGRESSORS[:2]
    return RegressionSpec("p", regressors, DEMAND_ENDOGENOUS, DEMAND_INSTRUMENTS)


def supply_spec(
    include_shifter_instrument: bool = True, instruments: Sequence[str] | None = None
) -> RegressionSpec:
    if instruments is None:
        instruments = SUPPLY_INSTRUMENTS if include_shifter_instrument else SUPPLY_INSTRUMENTS[:1]
    return RegressionSpec("p", SUPPLY_REGRESSORS, SUPPLY_ENDOGENOUS, tuple(instruments))


def estimate_demand(data, *, include_shifter: bool = True, single_first_stage: bool = False) -> FitResult:
    """2SLS fit of P on (Q, zr*Q, Y) instrumented by (zr, H, K).

    Coefficients keep the regression signs: ``coef(q) = -alpha1`` and
    ``coef(zq) = -alpha2``; :attr:`EstimateRecord.alpha_hat` flips them.
    ``include_shifter=False`` drops Y from the regressors.
    """
    interactions = {"zq": ("zr", "q")} if single_first_stage else None
    return tsls(data, demand_spec(include_shifter), single_first_stage=interactions)


def estimate_supply(
    data,
    demand_fit: FitResult,
    include_shifter_instrument: bool = True,
    *,
    instruments: Sequence[str] | None = None,
    single_first_stage: bool = False,
) -> EstimateRecord:
    """2SLS fit of the supply relation and recovery of theta and gamma1.

    Excluded instruments are (zr, Y). With ``include_shifter_instrument=False``
    only zr remains, the supply equation is under-identified and
    ``RankDeficient`` is raised. ``instruments`` replaces the excluded set
    altogether (e.g. ``PS_SUPPLY_INSTRUMENTS`` when Y is unavailable).

    Raises
    ------
    ThetaUndefined
        If ``|alpha2_hat| <= 1e-12``.
    """
    alpha1 = -demand_fit["q"]
    alpha2 = -demand_fit["zq"]
    if not (np.isfinite(alpha1) and np.isfinite(alpha2)) or abs(alpha2) <= THETA_TOL:
        raise ThetaUndefined(f"alpha2_hat = {alpha2!r} does not identify theta")
    interactions = {"zq": ("zr", "q")} if single_first_stage else None
    supply = tsls(
        data, supply_spec(include_shifter_instrument, instruments), single_first_stage=interactions
    )
    theta = supply["zq"] / alpha2
    gamma1 = supply["q"] - theta * alpha1
    return EstimateRecord(
        demand=demand_fit,
        supply=supply,
        theta_hat=theta,
        gamma1_hat=gamma1,
        weak_instrument=demand_fit.weak_instrument or supply.weak_instrument,
    )
