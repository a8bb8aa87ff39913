"""Gas report: per-label measurements against the published baselines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

# price point used for the fiat columns: 1M gas costs 0.02 ETH, worth 0.8 EUR
ETH_PER_GAS = 0.02 / 1_000_000
EUR_PER_ETH = 40.0


def gas_to_eth(gas: float) -> float:
    return gas * ETH_PER_GAS


def gas_to_eur(gas: float) -> float:
    return gas_to_eth(gas) * EUR_PER_ETH


@dataclass
class GasRow:
    label: str
    count: int
    total: int
    baseline: int | None = None

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def deviation(self) -> float | None:
        """Relative deviation of the mean from the baseline, in percent."""
        if not self.baseline:
            return None
        return 100.0 * (self.mean - self.baseline) / self.baseline

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "count": self.count,
            "total": self.total,
            "mean": round(self.mean, 1),
            "baseline": self.baseline,
            "deviationPct": None if self.deviation is None else round(self.deviation, 2),
            "eth": round(gas_to_eth(self.mean), 6),
            "eur": round(gas_to_eur(self.mean), 4),
        }


@dataclass
class GasReport:
    rows: list[GasRow] = field(default_factory=list)

    def row(self, label: str) -> GasRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def __contains__(self, label: str) -> bool:
        return any(r.label == label for r in self.rows)

    def ordering(self, *labels: str) -> bool:
        """True when the mean cost strictly increases along ``labels``."""
        means = [self.row(lbl).mean for lbl in labels]
        return all(a < b for a, b in zip(means, means[1:]))

    def to_dict(self) -> dict[str, Any]:
        return {"rows": [r.to_dict() for r in self.rows]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        head = f"{'label':<26}{'n':>6}{'mean gas':>12}{'baseline':>12}{'dev %':>9}{'ETH':>11}{'EUR':>9}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            base = "" if r.baseline is None else f"{r.baseline:,}"
            dev = "" if r.deviation is None else f"{r.deviation:+.1f}"
            lines.append(
                f"{r.label:<26}{r.count:>6}{r.mean:>12,.0f}{base:>12}{dev:>9}"
                f"{gas_to_eth(r.mean):>11.5f}{gas_to_eur(r.mean):>9.3f}"
            )
        return "\n".join(lines)


def build_gas_report(samples: list[tuple[str, str | None, int]], baselines: dict[str, int]) -> GasReport:
    """Aggregate ``(label, baseline key, gas)`` samples in first-seen order.

    The baseline key defaults to the label itself.
    """
    rows: dict[str, GasRow] = {}
    for label, key, gas in samples:
        row = rows.get(label)
        if row is None:
            row = rows[label] = GasRow(label, 0, 0, baselines.get(key or label))
        row.count += 1
        row.total += gas
    return GasReport(list(rows.values()))
