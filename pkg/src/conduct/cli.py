"""Command-line entry point reproducing the simulation tables and the rank check.

Examples
--------
::

    conduct run --preset table1 --seed 42 --format markdown
    conduct run --preset tableA3 --format csv --output tableA3.csv --workers 4
    conduct run --preset prop1_diagnostic
    conduct run --config experiment.cfg --replications 200

A config file holds ``key = value`` lines (``#`` starts a comment). Keys are
the long flag names with ``-`` or ``_``; lists are comma separated. Flags given
on the command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .datagen import DgpConfig, generate_dataset
from .diagnostics import diagnostic_report, paired_design_sweep
from .exceptions import InvalidConfig
from .model import BASELINE_PARAMS
from .montecarlo import DEFAULT_SAMPLE_SIZES, DEFAULT_SIGMAS, Design, ExperimentGrid, run_grid
from .report import to_csv, to_json, to_markdown

PRESETS = ("table1", "tableA2_ps_replication", "tableA3", "prop1_diagnostic", "custom")
FORMATS = ("csv", "markdown")

EXIT_OK, EXIT_INVALID_CONFIG, EXIT_IO_ERROR = 0, 2, 3

_PRESET_GRIDS = {
    "table1": dict(sigmas=(0.001, 0.5, 2.0), sample_sizes=DEFAULT_SAMPLE_SIZES, design=Design.WITH_SHIFTER),
    "tableA2_ps_replication": dict(sigmas=DEFAULT_SIGMAS, sample_sizes=(50,), design=Design.WITHOUT_SHIFTER),
    "tableA3": dict(sigmas=DEFAULT_SIGMAS, sample_sizes=DEFAULT_SAMPLE_SIZES, design=Design.WITHOUT_SHIFTER),
}
_PRESET_TITLES = {
    "table1": "Linear model with demand shifter",
    "tableA2_ps_replication": "Linear model without demand shifter, T = 50",
    "tableA3": "Linear model without demand shifter",
}

_PROP1_SEEDS = 100
_PROP1_SAMPLE_SIZE = 100


@dataclass(frozen=True)
class RunConfig:
    preset: str = "table1"
    sigmas: tuple[float, ...] | None = None
    sample_sizes: tuple[int, ...] | None = None
    replications: int | None = None
    master_seed: int = 0
    design: Design | None = None
    output_format: str = "markdown"
    output_path: str | None = None
    workers: int = 1

    def validate(self) -> RunConfig:
        if self.preset not in PRESETS:
            raise InvalidConfig(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if self.output_format not in FORMATS:
            raise InvalidConfig(f"unknown format {self.output_format!r}; choose from {', '.join(FORMATS)}")
        if self.preset == "custom":
            missing = [
                flag
                for flag, value in (
                    ("--sigma", self.sigmas),
                    ("--sample-size", self.sample_sizes),
                    ("--replications", self.replications),
                )
                if value is None
            ]
            if missing:
                raise InvalidConfig(f"preset 'custom' requires {', '.join(missing)}")
        if self.replications is not None and self.replications < 1:
            raise InvalidConfig("replications must be >= 1")
        if self.sigmas is not None and (not self.sigmas or min(self.sigmas) < 0):
            raise InvalidConfig("sigmas must be a non-empty list of non-negative values")
        if self.sample_sizes is not None and (not self.sample_sizes or min(self.sample_sizes) < 10):
            raise InvalidConfig("sample sizes must be a non-empty list of integers >= 10")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")
        return self

    def grid(self) -> ExperimentGrid:
        base = _PRESET_GRIDS.get(self.preset, dict(design=Design.WITH_SHIFTER))
        settings = dict(base)
        if self.sigmas is not None:
            settings["sigmas"] = self.sigmas
        if self.sample_sizes is not None:
            settings["sample_sizes"] = self.sample_sizes
        if self.replications is not None:
            settings["replications"] = self.replications
        if self.design is not None:
            settings["design"] = self.design
        return ExperimentGrid(base_params=BASELINE_PARAMS, master_seed=self.master_seed, **settings)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


_KEYS = {
    "preset": ("preset", str),
    "sigma": ("sigmas", _floats),
    "sigmas": ("sigmas", _floats),
    "sample_size": ("sample_sizes", _ints),
    "sample_sizes": ("sample_sizes", _ints),
    "replications": ("replications", int),
    "seed": ("master_seed", int),
    "design": ("design", Design),
    "format": ("output_format", str),
    "output": ("output_path", str),
    "workers": ("workers", int),
}


def parse_config_file(text: str) -> dict:
    """Parse ``key = value`` lines into RunConfig field values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise InvalidConfig(f"config line {lineno}: unknown key {key!r}")
        name, convert = _KEYS[key]
        try:
            values[name] = convert(value)
        except ValueError as exc:
            raise InvalidConfig(f"config line {lineno}: bad value for {key}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conduct", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a preset or custom experiment")
    # defaults are None so config-file values survive unless a flag is given
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--preset", choices=PRESETS)
    run.add_argument("--sigma", type=float, action="append", help="error SD (repeatable)")
    run.add_argument("--sample-size", type=int, action="append", help="markets per dataset (repeatable)")
    run.add_argument("--replications", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--design", choices=[d.value for d in Design])
    run.add_argument("--format", choices=FORMATS)
    run.add_argument("--output", help="output file (default: stdout)")
    run.add_argument("--workers", type=int, help="worker processes; output does not depend on it")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidConfig(f"cannot read config file: {exc}") from None
        values.update(parse_config_file(text))
    flags = {
        "preset": args.preset,
        "sigmas": tuple(args.sigma) if args.sigma else None,
        "sample_sizes": tuple(args.sample_size) if args.sample_size else None,
        "replications": args.replications,
        "master_seed": args.seed,
        "design": Design(args.design) if args.design else None,
        "output_format": args.format,
        "output_path": args.output,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**values).validate()
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidConfig):
            raise
        raise InvalidConfig(str(exc)) from None


def prop1_report(config: RunConfig) -> dict:
    """Rank of the zeta system and the realized design, with and without the shifter."""
    sizes = config.sample_sizes or (_PROP1_SAMPLE_SIZE,)
    sample_size = sizes[0]
    noiseless = BASELINE_PARAMS.replace(sigma=0.0)
    out = {}
    for key, include in (("with_shifter", True), ("without_shifter", False)):
        dgp = DgpConfig(noiseless, sample_size, master_seed=config.master_seed, include_demand_shifter=include)
        out[key] = diagnostic_report(dgp.effective_params, generate_dataset(dgp, 0))
    out["design_sweep"] = paired_design_sweep(
        BASELINE_PARAMS,
        seeds=config.replications or _PROP1_SEEDS,
        sample_size=sample_size,
        sigmas=config.sigmas or (0.0, 2.0),
        master_seed=config.master_seed,
    )
    return out


def render(config: RunConfig) -> str:
    if config.preset == "prop1_diagnostic":
        return to_json(prop1_report(config))
    grid = config.grid()
    table = run_grid(grid, workers=config.workers)
    if config.output_format == "csv":
        return to_csv(table)
    with_shifter = grid.design is Design.WITH_SHIFTER
    statistics = ("bias", "rmse") if with_shifter else ("mean", "sd")
    title = _PRESET_TITLES.get(config.preset)
    return to_markdown(table, statistics=statistics, include_r2=not with_shifter, title=title)


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        text = render(config)
    except InvalidConfig as exc:
        return _fail("InvalidConfig", str(exc), EXIT_INVALID_CONFIG)
    if config.output_path is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        path = Path(config.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        return _fail("IoError", str(exc), EXIT_IO_ERROR)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
