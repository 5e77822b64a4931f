"""Replicated simulate-then-estimate experiments over a (sigma, T) grid."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .datagen import DgpConfig, derive_seed, generate_dataset
from .estimator import PS_SUPPLY_INSTRUMENTS, SUPPLY_INSTRUMENTS, estimate_demand, estimate_supply
from .exceptions import RankDeficient, ThetaUndefined
from .model import BASELINE_PARAMS, StructuralParams

PARAMETER_NAMES = (
    "alpha0",
    "alpha1",
    "alpha2",
    "alpha3",
    "gamma0",
    "gamma1",
    "gamma2",
    "gamma3",
    "theta",
)
R2_NAMES = ("r2_demand", "r2_supply")
STATISTICS = ("bias", "rmse", "mean", "sd")

DEFAULT_SIGMAS = (0.001, 0.5, 1.0, 2.0)
DEFAULT_SAMPLE_SIZES = (50, 100, 200, 1000)
DEFAULT_REPLICATIONS = 1000

OK, RANK_DEFICIENT, THETA_UNDEFINED = 0, 1, 2

# replications per task submitted to the process pool
BLOCK_SIZE = 50


class Design(str, enum.Enum):
    """Experimental design.

    Without the shifter, alpha3 is zero in the data and Y is left out of
    estimation altogether: demand is fit on (Q, zr*Q) and supply is
    instrumented by (zr, H, K).
    """

    WITH_SHIFTER = "with-shifter"
    WITHOUT_SHIFTER = "without-shifter"

    @property
    def include_demand_shifter(self) -> bool:
        return self is Design.WITH_SHIFTER

    @property
    def supply_instruments(self) -> tuple[str, ...]:
        return SUPPLY_INSTRUMENTS if self.include_demand_shifter else PS_SUPPLY_INSTRUMENTS

    @property
    def estimated_parameters(self) -> tuple[str, ...]:
        if self.include_demand_shifter:
            return PARAMETER_NAMES
        return tuple(p for p in PARAMETER_NAMES if p != "alpha3")


@dataclass(frozen=True)
class ExperimentGrid:
    """A full Monte Carlo design.

    ``supply_instruments`` overrides the design's excluded supply
    instruments; ``single_first_stage`` builds the fitted interaction as
    zr * fitted(Q) instead of giving zr*Q its own first stage.
    """

    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    sample_sizes: tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    replications: int = DEFAULT_REPLICATIONS
    base_params: StructuralParams = BASELINE_PARAMS
    design: Design = Design.WITH_SHIFTER
    master_seed: int = 0
    supply_instruments: tuple[str, ...] | None = None
    single_first_stage: bool = False

    def __post_init__(self):
        if self.supply_instruments is not None:
            object.__setattr__(self, "supply_instruments", tuple(self.supply_instruments))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "sample_sizes", tuple(int(t) for t in self.sample_sizes))
        object.__setattr__(self, "design", Design(self.design))
        if not self.sigmas or not self.sample_sizes:
            raise ValueError("sigma and sample-size grids must be non-empty")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("sigmas must be non-negative")

    def cell_seed(self, sigma: float, sample_size: int) -> int:
        return derive_seed(self.master_seed, float(sigma), int(sample_size))


@dataclass(frozen=True)
class ParamStats:
    bias: float
    rmse: float
    mean: float
    sd: float

    def get(self, statistic: str) -> float:
        return getattr(self, statistic)


def summarize(values: np.ndarray, truth: float) -> ParamStats:
    """Bias and RMSE divide by n, the SD by n-1 (reported as 0 when n == 1)."""
    n = len(values)
    if n == 0:
        nan = math.nan
        return ParamStats(nan, nan, nan, nan)
    mean = float(values.mean())
    dev = values - truth
    rmse = math.sqrt(float(dev @ dev) / n)
    sd = float(values.std(ddof=1)) if n > 1 else 0.0
    return ParamStats(bias=mean - truth, rmse=rmse, mean=mean, sd=sd)


@dataclass(frozen=True)
class CellStats:
    """Aggregated replications for one (sigma, T) cell.

    ``estimates`` holds one row per replication with columns
    ``PARAMETER_NAMES + R2_NAMES`` (NaN for failed replications), ``status``
    the per-replication outcome code and ``weak`` the weak-instrument flags.
    """

    sigma: float
    sample_size: int
    design: Design
    truth: dict[str, float]
    estimates: np.ndarray = field(repr=False)
    status: np.ndarray = field(repr=False)
    weak: np.ndarray = field(repr=False)
    stats: dict[str, ParamStats] = field(repr=False)

    @property
    def replications(self) -> int:
        return len(self.status)

    @property
    def n_ok(self) -> int:
        return int(np.sum(self.status == OK))

    @property
    def rank_deficient(self) -> int:
        return int(np.sum(self.status == RANK_DEFICIENT))

    @property
    def theta_undefined(self) -> int:
        return int(np.sum(self.status == THETA_UNDEFINED))

    @property
    def failures(self) -> int:
        return self.replications - self.n_ok

    @property
    def weak_instrument(self) -> int:
        return int(np.sum(self.weak))

    def __getitem__(self, name: str) -> ParamStats:
        return self.stats[name]


def simulate_replication(
    config: DgpConfig,
    index: int,
    *,
    supply_instruments: tuple[str, ...] | None = None,
    single_first_stage: bool = False,
) -> tuple[np.ndarray, int, bool]:
    """Estimates (nine parameters then demand and supply R^2), status code, weak flag.

    Y enters estimation only when ``config.include_demand_shifter`` is set.
    """
    shifter = config.include_demand_shifter
    if supply_instruments is None:
        supply_instruments = (Design.WITH_SHIFTER if shifter else Design.WITHOUT_SHIFTER).supply_instruments
    row = np.full(len(PARAMETER_NAMES) + len(R2_NAMES), np.nan)
    data = generate_dataset(config, index)
    try:
        demand = estimate_demand(data, include_shifter=shifter, single_first_stage=single_first_stage)
        record = estimate_supply(
            data, demand, instruments=supply_instruments, single_first_stage=single_first_stage
        )
    except RankDeficient:
        return row, RANK_DEFICIENT, False
    except ThetaUndefined:
        return row, THETA_UNDEFINED, False
    est = record.structural()
    row[: len(PARAMETER_NAMES)] = [est[name] for name in PARAMETER_NAMES]
    row[len(PARAMETER_NAMES) :] = record.demand.r_squared, record.supply.r_squared
    return row, OK, record.weak_instrument


def _simulate_block(args):
    config, start, stop, supply_iv, single = args
    rows, status, weak = [], [], []
    for i in range(start, stop):
        row, code, flag = simulate_replication(
            config, i, supply_instruments=supply_iv, single_first_stage=single
        )
        rows.append(row)
        status.append(code)
        weak.append(flag)
    return np.array(rows), np.array(status, dtype=np.int8), np.array(weak, dtype=bool)


def _aggregate(config: DgpConfig, sigma: float, design: Design, blocks) -> CellStats:
    estimates = np.concatenate([b[0] for b in blocks])
    status = np.concatenate([b[1] for b in blocks])
    weak = np.concatenate([b[2] for b in blocks])
    truth = config.effective_params.truth()
    ok = status == OK
    stats = {}
    for j, name in enumerate(PARAMETER_NAMES):
        stats[name] = summarize(estimates[ok, j], truth[name])
    for j, name in enumerate(R2_NAMES, start=len(PARAMETER_NAMES)):
        # R^2 has no true value; bias/rmse are taken against 0 and not reported
        stats[name] = summarize(estimates[ok, j], 0.0)
    return CellStats(
        sigma=sigma,
        sample_size=config.sample_size,
        design=design,
        truth=truth,
        estimates=estimates,
        status=status,
        weak=weak,
        stats=stats,
    )


def _blocks(config: DgpConfig, supply_iv, single: bool):
    s = config.replications
    return [
        (config, start, min(start + BLOCK_SIZE, s), supply_iv, single)
        for start in range(0, s, BLOCK_SIZE)
    ]


def _run_tasks(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_simulate_block(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_simulate_block, tasks))


def run_cell(
    params: StructuralParams,
    sigma: float,
    sample_size: int,
    replications: int,
    design: Design = Design.WITH_SHIFTER,
    master_seed: int = 0,
    *,
    supply_instruments: tuple[str, ...] | None = None,
    single_first_stage: bool = False,
    workers: int = 1,
) -> CellStats:
    """Run ``replications`` generate/estimate rounds and aggregate them.

    Replications that raise ``RankDeficient`` or ``ThetaUndefined`` are
    counted and left out of the moments; weak-instrument replications are
    kept.
    """
    design = Design(design)
    config = DgpConfig(
        params=params.replace(sigma=float(sigma)),
        sample_size=sample_size,
        replications=replications,
        master_seed=master_seed,
        include_demand_shifter=design.include_demand_shifter,
    )
    blocks = _run_tasks(_blocks(config, supply_instruments, single_first_stage), workers)
    return _aggregate(config, float(sigma), design, blocks)


@dataclass(frozen=True)
class SummaryTable:
    grid: ExperimentGrid
    cells: dict[tuple[float, int], CellStats]

    def cell(self, sigma: float, sample_size: int) -> CellStats:
        return self.cells[(float(sigma), int(sample_size))]

    def __iter__(self):
        return iter(self.cells.values())


def run_grid(grid: ExperimentGrid, workers: int = 1) -> SummaryTable:
    """Run every (sigma, T) cell of ``grid``.

    Each cell is seeded from ``(master_seed, sigma, T)`` alone, so results do
    not depend on which other cells are present or on ``workers``.
    """
    include = grid.design.include_demand_shifter
    configs = {}
    tasks = []
    spans = {}
    for sigma in grid.sigmas:
        for t in grid.sample_sizes:
            config = DgpConfig(
                params=grid.base_params.replace(sigma=sigma),
                sample_size=t,
                replications=grid.replications,
                master_seed=grid.cell_seed(sigma, t),
                include_demand_shifter=include,
            )
            cell_tasks = _blocks(config, grid.supply_instruments, grid.single_first_stage)
            configs[(sigma, t)] = config
            spans[(sigma, t)] = (len(tasks), len(tasks) + len(cell_tasks))
            tasks.extend(cell_tasks)
    results = _run_tasks(tasks, workers)
    cells = {
        key: _aggregate(configs[key], key[0], grid.design, results[a:b])
        for key, (a, b) in spans.items()
    }
    return SummaryTable(grid=grid, cells=cells)


def bias_variance_gap(stats: ParamStats, n: int) -> float:
    """|rmse^2 - bias^2 - sd^2 (n-1)/n| relative to max(1, rmse^2)."""
    if n == 0:
        return 0.0
    var = stats.sd**2 * (n - 1) / n
    return abs(stats.rmse**2 - stats.bias**2 - var) / max(1.0, stats.rmse**2)
