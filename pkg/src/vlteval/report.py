"""Aggregation and table emission: per-dataset, per-density-tier, and
language-resource-tier means, plus the distribution export for comparing
human scores against DA and arithmetic-mean scores.

CSV output is for humans (2 decimals, '.' separator); a parallel JSON
emission keeps full precision. Both are byte-stable given identical inputs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

from .calibrate import DAResult, scale_human
from .corpus import Corpus, LanguageTierMap
from .vectors import METRIC_NAMES

GROUP_KINDS = ("dataset", "density_tier", "language_tier", "system")


@dataclass(frozen=True)
class EvalRow:
    group: str
    count: int
    metric_means: dict[str, float]   # per-metric mean over present values
    da_mean: float
    arithmetic_mean_mean: float


@dataclass(frozen=True)
class EvalTable:
    group_by: str
    rows: tuple[EvalRow, ...]

    def row(self, group: str) -> EvalRow:
        for r in self.rows:
            if r.group == group:
                return r
        raise KeyError(group)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def aggregate(results: list[DAResult], group_by: str,
              tiermap: LanguageTierMap | None = None) -> EvalTable:
    """Arithmetic mean per metric per group, rows sorted by group name."""
    if not results:
        raise ValueError("cannot aggregate an empty result set")
    if group_by not in GROUP_KINDS:
        raise ValueError(f"group_by must be one of {GROUP_KINDS}, got {group_by!r}")

    def key_of(r: DAResult) -> str:
        if group_by == "dataset":
            return r.dataset
        if group_by == "density_tier":
            return r.tier
        if group_by == "system":
            return r.system
        if tiermap is None:
            raise ValueError("language_tier grouping needs a LanguageTierMap")
        return tiermap.tier_of(r.lang)

    groups: dict[str, list[DAResult]] = {}
    for r in results:
        groups.setdefault(key_of(r), []).append(r)

    rows = []
    for group in sorted(groups):
        members = groups[group]
        metric_means = {}
        for m in METRIC_NAMES:
            values = [r.vector.get(m) for r in members if r.vector.get(m) is not None]
            if values:
                metric_means[m] = _mean(values)
        rows.append(EvalRow(
            group=group,
            count=len(members),
            metric_means=metric_means,
            da_mean=_mean([r.da_score for r in members]),
            arithmetic_mean_mean=_mean([r.arithmetic_mean for r in members]),
        ))
    return EvalTable(group_by=group_by, rows=tuple(rows))


def language_tier_table(results: list[DAResult], tiermap: LanguageTierMap) -> EvalTable:
    """One row per language-resource tier; errors on any unmapped language."""
    return aggregate(results, "language_tier", tiermap)


def table1_average(values: list[float]) -> float:
    """Mean of the nine per-dataset (BLEU, BS-F1, COMET) values that make up
    one overview-table row."""
    if len(values) != 9:
        raise ValueError(f"expected nine metric values, got {len(values)}")
    if any(v is None for v in values):
        raise ValueError("all nine metric values must be present")
    return _mean([float(v) for v in values])


def export_distributions(results: list[DAResult],
                         human_overall: dict[tuple[str, str, str], float],
                         ) -> tuple[list[dict], int]:
    """Rows of (id, system, lang, human_scaled, da, arithmetic_mean) for every
    rated pair, plus the count of unrated pairs skipped."""
    rows = []
    skipped = 0
    for r in results:
        overall = human_overall.get((r.id, r.system, r.lang))
        if overall is None:
            skipped += 1
            continue
        rows.append({
            "id": r.id,
            "system": r.system,
            "lang": r.lang,
            "human_scaled": scale_human(overall),
            "da": r.da_score,
            "arithmetic_mean": r.arithmetic_mean,
        })
    return rows, skipped


def write_table_csv(table: EvalTable, path, provenance: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh)
        writer.writerow([table.group_by, "count", *METRIC_NAMES, "da_score", "arithmetic_mean"])
        for row in table.rows:
            writer.writerow([
                row.group, row.count,
                *[f"{row.metric_means[m]:.2f}" if m in row.metric_means else ""
                  for m in METRIC_NAMES],
                f"{row.da_mean:.2f}", f"{row.arithmetic_mean_mean:.2f}",
            ])


def write_table_json(table: EvalTable, path, provenance: dict | None = None) -> None:
    payload = {
        "group_by": table.group_by,
        "rows": [
            {
                "group": row.group,
                "count": row.count,
                "metric_means": row.metric_means,
                "da_mean": row.da_mean,
                "arithmetic_mean_mean": row.arithmetic_mean_mean,
            }
            for row in table.rows
        ],
    }
    if provenance:
        payload["provenance"] = provenance
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_distributions_csv(rows: list[dict], skipped: int, path,
                            provenance: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh)
        writer.writerow(["id", "system", "lang", "human_scaled", "da", "arithmetic_mean"])
        for row in rows:
            writer.writerow([
                row["id"], row["system"], row["lang"],
                f"{row['human_scaled']:.2f}", f"{row['da']:.2f}",
                f"{row['arithmetic_mean']:.2f}",
            ])
        fh.write(f"# skipped_unrated={skipped}\n")
