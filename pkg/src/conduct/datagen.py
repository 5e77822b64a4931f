"""Simulated market data.

Exogenous variables follow::

    y ~ N(0, 1)     zr ~ N(10, 1)     w ~ N(3, 1)     r ~ N(0, 1)
    h = w + N(0, 1) k = r + N(0, 1)   eps_d, eps_c ~ N(0, sigma)

with ``sigma`` a standard deviation. Every market consumes exactly eight
standard normals in the fixed order (y, zr, w, r, h-noise, k-noise, eps_d,
eps_c), so a dataset of T markets is the same stream as T single draws.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (
    ExogenousDraw,
    MarketObservation,
    StructuralParams,
    demand_price,
    equilibrium_quantity,
)

DRAWS_PER_MARKET = 8
CSV_COLUMNS = ("y", "zr", "w", "r", "h", "k", "eps_d", "eps_c", "q", "p")
MIN_SAMPLE_SIZE = 10

_UINT64_MAX = 2**64 - 1


def _as_key(value) -> int:
    if isinstance(value, (float, np.floating)):
        return struct.unpack("<Q", struct.pack("<d", float(value)))[0]
    value = int(value)
    if not 0 <= value <= _UINT64_MAX:
        raise ValueError(f"seed key {value} is outside the unsigned 64-bit range")
    return value


def derive_seed(master_seed: int, *keys) -> int:
    """Stable 64-bit seed derived from ``master_seed`` and integer/float keys.

    Floats are keyed by their IEEE-754 bit pattern. The result depends only on
    the arguments, never on call order or process.
    """
    entropy = [_as_key(master_seed), *(_as_key(k) for k in keys)]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def draw_exogenous(rng: np.random.Generator, sigma: float, size: int | None = None) -> ExogenousDraw:
    """Draw exogenous variables and errors for one market, or ``size`` markets."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    shape = (DRAWS_PER_MARKET,) if size is None else (size, DRAWS_PER_MARKET)
    e = rng.standard_normal(shape)
    e = e if size is None else e.T
    y = e[0]
    zr = 10.0 + e[1]
    w = 3.0 + e[2]
    r = e[3]
    h = w + e[4]
    k = r + e[5]
    if sigma == 0:
        eps_d = np.zeros_like(e[6])
        eps_c = np.zeros_like(e[7])
    else:
        eps_d = sigma * e[6]
        eps_c = sigma * e[7]
    if size is None:
        return ExogenousDraw(*(float(v) for v in (y, zr, w, r, h, k, eps_d, eps_c)))
    return ExogenousDraw(y, zr, w, r, h, k, eps_d, eps_c)


@dataclass(frozen=True)
class DgpConfig:
    """Design of one simulated experiment cell."""

    params: StructuralParams
    sample_size: int
    replications: int = 1
    master_seed: int = 0
    include_demand_shifter: bool = True

    def __post_init__(self):
        if self.sample_size < MIN_SAMPLE_SIZE:
            raise ValueError(f"sample_size must be >= {MIN_SAMPLE_SIZE}, got {self.sample_size}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        _as_key(self.master_seed)

    @property
    def effective_params(self) -> StructuralParams:
        """Parameters used to generate data: alpha3 is zeroed when the shifter is off."""
        if self.include_demand_shifter:
            return self.params
        return self.params.replace(alpha3=0.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """T simulated markets stored column-wise.

    ``columns`` maps each of ``CSV_COLUMNS`` to a length-T float array. Item
    access additionally understands ``"zq"`` (the zr*q interaction) and
    ``"const"``.
    """

    columns: dict[str, np.ndarray]
    replication_index: int = 0
    seed_used: int = 0
    params: StructuralParams | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.columns["q"])

    def __getitem__(self, name: str) -> np.ndarray:
        if name == "zq":
            return self.columns["zr"] * self.columns["q"]
        if name == "const":
            return np.ones(len(self))
        return self.columns[name]

    @property
    def draw(self) -> ExogenousDraw:
        return ExogenousDraw(*(self.columns[c] for c in CSV_COLUMNS[:DRAWS_PER_MARKET]))

    @property
    def observations(self) -> list[MarketObservation]:
        rows = zip(*(self.columns[c].tolist() for c in CSV_COLUMNS))
        return [MarketObservation(*row) for row in rows]

    def to_csv(self, path) -> None:
        """Write one row per market; floats use shortest round-trip repr."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for row in zip(*(self.columns[c].tolist() for c in CSV_COLUMNS)):
                writer.writerow([repr(v) for v in row])

    @classmethod
    def from_csv(cls, path: str | Path, **kwargs) -> Dataset:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {reader.fieldnames}")
            rows = list(reader)
        columns = {c: np.array([float(row[c]) for row in rows]) for c in CSV_COLUMNS}
        return cls(columns, **kwargs)


def generate_dataset(config: DgpConfig, replication_index: int) -> Dataset:
    """Simulate one replication of ``config``.

    The RNG is seeded with ``derive_seed(config.master_seed, replication_index)``
    so replications can be produced in any order or process.
    """
    if not 0 <= replication_index < config.replications:
        raise IndexError(
            f"replication_index {replication_index} outside [0, {config.replications})"
        )
    params = config.effective_params
    seed = derive_seed(config.master_seed, replication_index)
    rng = np.random.default_rng(seed)
    draw = draw_exogenous(rng, params.sigma, size=config.sample_size)
    q = equilibrium_quantity(params, draw)
    p = demand_price(params, q, draw)
    columns = {name: np.asarray(getattr(draw, name), dtype=float) for name in CSV_COLUMNS[:DRAWS_PER_MARKET]}
    columns["q"] = np.asarray(q, dtype=float)
    columns["p"] = np.asarray(p, dtype=float)
    return Dataset(columns, replication_index=replication_index, seed_used=seed, params=params)
