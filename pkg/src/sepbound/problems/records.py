"""Result records shared by the builders, the sweep runner, and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, asdict

__all__ = ["BoundRecord", "CSV_COLUMNS", "format_float"]

CSV_COLUMNS = ["task", "relaxation", "direction", "param_name", "param_value",
               "value", "status", "solve_seconds", "solver_gap", "seed"]


def format_float(x) -> str:
    """12 significant digits; deterministic across runs."""
    if x is None:
        return ""
    return f"{float(x):.12g}"


@dataclass
class BoundRecord:
    task: str
    relaxation: str
    direction: str              # "upper" | "lower" | "exact"
    param_name: str
    param_value: float
    value: float | None
    status: str
    solve_seconds: float | None = None
    solver_gap: float | None = None
    seed: int | None = None

    def csv_row(self) -> list[str]:
        d = asdict(self)
        out = []
        for col in CSV_COLUMNS:
            v = d[col]
            if col in ("param_value", "value", "solver_gap"):
                out.append(format_float(v))
            elif col == "solve_seconds":
                out.append("" if v is None else f"{v:.3f}")
            else:
                out.append("" if v is None else str(v))
        return out
