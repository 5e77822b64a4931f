"""CSV and Markdown rendering of Monte Carlo summary tables."""

from __future__ import annotations

import csv
import io
import json

from .montecarlo import PARAMETER_NAMES, R2_NAMES, SummaryTable

CSV_HEADER = ("sigma", "sample_size", "parameter", "statistic", "value", "failures")

LABELS = {
    "alpha0": "α₀",
    "alpha1": "α₁",
    "alpha2": "α₂",
    "alpha3": "α₃",
    "gamma0": "γ₀",
    "gamma1": "γ₁",
    "gamma2": "γ₂",
    "gamma3": "γ₃",
    "theta": "θ",
    "r2_demand": "R² (demand)",
    "r2_supply": "R² (supply)",
}

PANEL_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _num(value: float) -> str:
    return repr(float(value))


def to_csv(table: SummaryTable) -> str:
    """One row per (sigma, T, parameter, statistic) at full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in table:
        head = (_num(cell.sigma), cell.sample_size)
        for name in PARAMETER_NAMES:
            for stat in ("bias", "rmse", "mean", "sd"):
                writer.writerow((*head, name, stat, _num(cell[name].get(stat)), cell.failures))
        for name in R2_NAMES:
            for stat in ("mean", "sd"):
                writer.writerow((*head, name, stat, _num(cell[name].get(stat)), cell.failures))
        counts = {
            "n_ok": cell.n_ok,
            "rank_deficient": cell.rank_deficient,
            "theta_undefined": cell.theta_undefined,
            "weak_instrument": cell.weak_instrument,
        }
        for stat, count in counts.items():
            writer.writerow((*head, "replications", stat, count, cell.failures))
    return buf.getvalue()


def _fmt3(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def to_markdown(
    table: SummaryTable,
    statistics: tuple[str, str] = ("bias", "rmse"),
    include_r2: bool = False,
    title: str | None = None,
) -> str:
    """Panel layout: one panel per sigma, a column pair per sample size.

    Values are rounded to three decimals.
    """
    grid = table.grid
    rows = list(grid.design.estimated_parameters)
    if include_r2:
        rows += list(R2_NAMES)
    heads = [s.upper() if s in ("sd", "rmse") else s.capitalize() for s in statistics]
    lines = []
    if title:
        lines += [f"## {title}", ""]
    for letter, sigma in zip(PANEL_LETTERS, grid.sigmas):
        lines.append(f"### ({letter}) σ = {sigma:g}")
        lines.append("")
        lines.append("|  | " + " | ".join(heads * len(grid.sample_sizes)) + " |")
        lines.append("|---|" + "---:|" * (2 * len(grid.sample_sizes)))
        cells = [table.cell(sigma, t) for t in grid.sample_sizes]
        for name in rows:
            values = [_fmt3(c[name].get(stat)) for c in cells for stat in statistics]
            lines.append(f"| {LABELS[name]} | " + " | ".join(values) + " |")
        sizes = [v for t in grid.sample_sizes for v in ("", str(t))]
        lines.append("| Sample size (T) | " + " | ".join(sizes) + " |")
        failed = [(c.sample_size, c.failures) for c in cells if c.failures]
        if failed:
            detail = ", ".join(f"T={t}: {n}" for t, n in failed)
            lines.append("")
            lines.append(f"Replications excluded after estimation failure: {detail}.")
        lines.append("")
    return "\n".join(lines)


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
