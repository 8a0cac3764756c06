"""Results tables and their CSV/JSON emission.

CSV schema (fixed column order): experiment,cell,seed,epoch,metric,value.
Per-epoch rows carry an epoch number; summary rows leave it blank. The JSON
summary holds min/mean/max (and sample std) per (cell, metric) over seeds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field


@dataclass
class ResultsTable:
    experiment: str
    rows: list[dict] = field(default_factory=list)

    def add(self, cell: str, seed: int, metric: str, value: float,
            epoch: int | None = None) -> None:
        self.rows.append({"experiment": self.experiment, "cell": cell,
                          "seed": seed, "epoch": epoch, "metric": metric,
                          "value": float(value)})

    def values(self, cell: str, metric: str) -> list[float]:
        return [r["value"] for r in self._sorted()
                if r["cell"] == cell and r["metric"] == metric and r["epoch"] is None]

    def cells(self) -> list[str]:
        return sorted({r["cell"] for r in self.rows})

    def _sorted(self) -> list[dict]:
        return sorted(self.rows, key=lambda r: (r["cell"], r["seed"],
                                                -1 if r["epoch"] is None else r["epoch"],
                                                r["metric"]))

    def summary(self) -> dict:
        """min/mean/max/std per (cell, metric) over the epoch-free rows."""
        groups: dict[tuple[str, str], list[float]] = {}
        for r in self.rows:
            if r["epoch"] is not None:
                continue
            groups.setdefault((r["cell"], r["metric"]), []).append(r["value"])
        out: dict[str, dict] = {}
        for (cell, metric), vals in sorted(groups.items()):
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                std = math.sqrt(sum((v - mean) ** 2 for v in vals) / (len(vals) - 1))
            else:
                std = 0.0
            out.setdefault(cell, {})[metric] = {
                "min": min(vals), "mean": mean, "max": max(vals),
                "std": std, "n": len(vals),
            }
        return out

    def to_csv(self) -> str:
        lines = ["experiment,cell,seed,epoch,metric,value"]
        for r in self._sorted():
            epoch = "" if r["epoch"] is None else str(r["epoch"])
            lines.append(f"{r['experiment']},{r['cell']},{r['seed']},{epoch},"
                         f"{r['metric']},{r['value']!r}")
        return "\n".join(lines) + "\n"


def emit_results(table: ResultsTable, out_dir: str) -> tuple[str, str]:
    """Write <experiment>.csv and <experiment>_summary.json; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{table.experiment}.csv")
    json_path = os.path.join(out_dir, f"{table.experiment}_summary.json")
    with open(csv_path, "w", newline="\n") as f:
        f.write(table.to_csv())
    with open(json_path, "w", newline="\n") as f:
        json.dump(table.summary(), f, indent=2, sort_keys=True)
        f.write("\n")
    return csv_path, json_path
