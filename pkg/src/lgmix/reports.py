"""Experiment reports with deterministic serialization.

A report snapshots one experiment: the configuration it ran under, its
seeds and trial count, a list of rows (dicts sharing a column schema), and
scalar extras. JSON output is canonical (sorted keys, fixed separators) and
CSV cells use ``repr`` for floats, so identical runs produce byte-identical
files. Wall-clock timing is kept on the object for interactive use but is
deliberately excluded from serialization to preserve reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

__all__ = ["ExperimentReport"]


def _plain(value):
    """Convert numpy scalars/arrays to plain Python for JSON."""
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        # JSON has no inf/nan; keep a readable token
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(value)


@dataclass
class ExperimentReport:
    """Rows plus context for one experiment run."""

    name: str
    columns: list[str]
    rows: list[dict]
    config: dict = field(default_factory=dict)
    seed: int = 0
    trials: int = 1
    regime: str | None = None
    extras: dict = field(default_factory=dict)
    wall_clock_seconds: float | None = None  # not serialized

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        for row in self.rows:
            missing = [c for c in self.columns if c not in row]
            if missing:
                raise InvalidInputError(f"row missing columns {missing}: {row}")
            tail = row.get("empirical_tail")
            if tail is not None and not 0.0 <= tail <= 1.0:
                raise InvalidInputError(f"empirical_tail out of [0, 1]: {tail}")

    def sorted_rows(self) -> list[dict]:
        key = self.columns[0]
        try:
            return sorted(self.rows, key=lambda r: r[key])
        except TypeError:
            return list(self.rows)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "regime": self.regime,
            "seed": self.seed,
            "trials": self.trials,
            "config": _plain(self.config),
            "columns": list(self.columns),
            "rows": [_plain(r) for r in self.sorted_rows()],
            "extras": _plain(self.extras),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    def save_csv(self, path, columns: list[str] | None = None) -> None:
        cols = columns or self.columns
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in self.sorted_rows():
                fh.write(",".join(_cell(row.get(c)) for c in cols) + "\n")
