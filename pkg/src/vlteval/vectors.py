"""Metric vectors: the four scores backing a DA Score for one scored pair."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

METRIC_NAMES = ("bleu", "chrfpp", "bsf1", "comet")


@dataclass(frozen=True)
class MetricVector:
    """Scores for one (sample, system, target-language) triple, 0-100 scale.

    Absent metrics are None; provenance records where each present score
    came from ("native" or an external source name).
    """

    id: str
    system: str
    lang: str
    bleu: float | None = None
    chrfpp: float | None = None
    bsf1: float | None = None
    comet: float | None = None
    provenance: dict[str, str] = field(default_factory=dict)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.id, self.system, self.lang)

    def get(self, metric: str) -> float | None:
        if metric not in METRIC_NAMES:
            raise KeyError(metric)
        return getattr(self, metric)

    def present_metrics(self) -> tuple[str, ...]:
        return tuple(m for m in METRIC_NAMES if getattr(self, m) is not None)

    def is_complete(self) -> bool:
        return len(self.present_metrics()) == len(METRIC_NAMES)

    def with_score(self, metric: str, score: float, source: str) -> "MetricVector":
        if metric not in METRIC_NAMES:
            raise KeyError(metric)
        return replace(
            self, **{metric: score}, provenance={**self.provenance, metric: source}
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "system": self.system,
            "lang": self.lang,
            **{m: getattr(self, m) for m in METRIC_NAMES},
            "provenance": dict(self.provenance),
        }


def vector_from_dict(obj: dict) -> MetricVector:
    return MetricVector(
        id=obj["id"],
        system=obj["system"],
        lang=obj["lang"],
        bleu=obj.get("bleu"),
        chrfpp=obj.get("chrfpp"),
        bsf1=obj.get("bsf1"),
        comet=obj.get("comet"),
        provenance=dict(obj.get("provenance", {})),
    )
