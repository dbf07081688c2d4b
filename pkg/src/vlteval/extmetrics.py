"""Ingestion of embedding-based metric scores (BERTScore-F1, COMET).

Scores arrive either as precomputed JSONL files or from a subprocess adapter
speaking a line-delimited JSON protocol, so no neural model ever runs in this
process.
"""

from __future__ import annotations

import json
import logging
import subprocess
from dataclasses import dataclass, field

from .vectors import MetricVector

logger = logging.getLogger(__name__)

SCALE_0_1 = "0-1"
SCALE_0_100 = "0-100"

Key = tuple[str, str, str]  # (sample id, system, target lang)


class ScoreFileError(ValueError):
    pass


class AdapterError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScoreTable:
    metric_name: str
    entries: dict[Key, float]
    checkpoint: str | None = None

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class AdapterSpec:
    command: tuple[str, ...]
    batch_size: int = 64
    timeout: float = 300.0
    scale: str = SCALE_0_100

    def __post_init__(self):
        if not self.command:
            raise ValueError("adapter command must be non-empty")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def _normalize(score: float, scale: str) -> float:
    if scale == SCALE_0_1:
        return score * 100.0
    if scale == SCALE_0_100:
        return score
    raise ValueError(f"unknown scale {scale!r}")


def load_scores(path, metric_name: str, scale: str = SCALE_0_100) -> ScoreTable:
    """Load a JSONL score file of {id, system, lang, score} rows."""
    entries: dict[Key, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ScoreFileError(f"{path}: line {lineno}: invalid JSON: {exc.msg}") from exc
            try:
                key: Key = (obj["id"], obj["system"], obj["lang"])
                score = obj["score"]
            except (KeyError, TypeError) as exc:
                raise ScoreFileError(f"{path}: line {lineno}: missing field {exc}") from exc
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise ScoreFileError(f"{path}: line {lineno}: non-numeric score {score!r}")
            if key in entries:
                raise ScoreFileError(f"{path}: line {lineno}: duplicate key {key}")
            entries[key] = _normalize(float(score), scale)
    return ScoreTable(metric_name=metric_name, entries=entries)


def run_adapter(spec: AdapterSpec, batch: list[dict], metric_name: str = "external") -> ScoreTable:
    """Run a scoring adapter subprocess over a batch of {id, src, hyp, ref}
    requests; replies are matched by id, never by position."""
    if not batch:
        return ScoreTable(metric_name=metric_name, entries={})

    payload = "".join(
        json.dumps({"id": row["id"], "src": row["src"], "hyp": row["hyp"], "ref": row["ref"]},
                   ensure_ascii=False) + "\n"
        for row in batch
    )
    try:
        proc = subprocess.run(
            list(spec.command), input=payload, capture_output=True,
            text=True, timeout=spec.timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise AdapterError(f"adapter {spec.command[0]!r} timed out after {spec.timeout}s") from exc
    except OSError as exc:
        raise AdapterError(f"adapter {spec.command[0]!r} failed to launch: {exc}") from exc
    if proc.returncode != 0:
        raise AdapterError(
            f"adapter {spec.command[0]!r} exited {proc.returncode}; stderr: {proc.stderr.strip()}"
        )

    scores_by_id: dict[str, float] = {}
    for lineno, raw in enumerate(proc.stdout.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"adapter output line {lineno} is not JSON: {raw!r}") from exc
        if "error" in obj:
            raise AdapterError(f"adapter reported error: {obj['error']}")
        if obj["id"] in scores_by_id:
            raise AdapterError(f"adapter replied twice for id {obj['id']!r}")
        scores_by_id[obj["id"]] = float(obj["score"])

    entries: dict[Key, float] = {}
    for row in batch:
        if row["id"] not in scores_by_id:
            raise AdapterError(f"adapter output is missing id {row['id']!r}")
        key = (row["id"], row.get("system", ""), row.get("lang", ""))
        entries[key] = _normalize(scores_by_id[row["id"]], spec.scale)
    return ScoreTable(metric_name=metric_name, entries=entries)


def merge_into_vectors(native: list[MetricVector],
                       tables: dict[str, ScoreTable]) -> list[MetricVector]:
    """Merge external score tables (keyed by DA metric name, e.g. "bsf1",
    "comet") into the native partial vectors. External keys absent from the
    native set are ignored with a warning; absences stay absent."""
    by_key = {v.key: v for v in native}
    for metric, table in tables.items():
        for key, score in table.entries.items():
            vector = by_key.get(key)
            if vector is None:
                logger.warning("external %s score for unknown pair %s ignored", metric, key)
                continue
            source = table.metric_name
            if table.checkpoint:
                source = f"{source}@{table.checkpoint}"
            by_key[key] = vector.with_score(metric, score, source)
    return [by_key[v.key] for v in native]


def validate_table(table: ScoreTable) -> list[str]:
    """Report (never clamp) out-of-range scores after normalization."""
    return [
        f"{table.metric_name}: score {score} for {key} outside [0, 100]"
        for key, score in sorted(table.entries.items())
        if not 0.0 <= score <= 100.0
    ]
