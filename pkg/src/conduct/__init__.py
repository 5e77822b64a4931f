"""Conduct-parameter identification in linear homogeneous-goods markets.

Simulate equilibrium market data from a linear demand / marginal-cost system,
estimate demand and supply by two-stage least squares, aggregate Monte Carlo
bias/RMSE tables and check the rank condition that identifies the conduct
parameter.
"""

from .datagen import Dataset, DgpConfig, derive_seed, draw_exogenous, generate_dataset
from .diagnostics import (
    ChiVector,
    ZetaSystem,
    design_collinearity,
    zeta_coefficients,
    zeta_rank,
)
from .estimator import (
    EstimateRecord,
    FitResult,
    RegressionSpec,
    estimate_demand,
    estimate_supply,
    ols,
    tsls,
)
from .exceptions import (
    ConductError,
    DegenerateDenominator,
    InvalidConfig,
    RankDeficient,
    ThetaUndefined,
)
from .model import (
    BASELINE_PARAMS,
    ExogenousDraw,
    MarketObservation,
    StructuralParams,
    demand_price,
    equilibrium_quantity,
    supply_price,
)
from .montecarlo import (
    PARAMETER_NAMES,
    CellStats,
    Design,
    ExperimentGrid,
    SummaryTable,
    run_cell,
    run_grid,
)

__version__ = "0.1.0"

__all__ = [
    "BASELINE_PARAMS",
    "PARAMETER_NAMES",
    "CellStats",
    "ChiVector",
    "ConductError",
    "Dataset",
    "DegenerateDenominator",
    "Design",
    "DgpConfig",
    "EstimateRecord",
    "ExogenousDraw",
    "ExperimentGrid",
    "FitResult",
    "InvalidConfig",
    "MarketObservation",
    "RankDeficient",
    "RegressionSpec",
    "StructuralParams",
    "SummaryTable",
    "ThetaUndefined",
    "ZetaSystem",
    "demand_price",
    "derive_seed",
    "design_collinearity",
    "draw_exogenous",
    "equilibrium_quantity",
    "estimate_demand",
    "estimate_supply",
    "generate_dataset",
    "ols",
    "run_cell",
    "run_grid",
    "supply_price",
    "tsls",
    "zeta_coefficients",
    "zeta_rank",
]
