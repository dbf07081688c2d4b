"""Per-tier metric weights from metric-human Pearson correlations, and the
density-aware score they define.

The DA score of a pair is the convex combination of its four metrics (BLEU,
chrF++, BERTScore-F1, COMET, all 0-100) under the tier's weights, which are
the tier's non-negative metric-human correlations normalized to sum to one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .density import TIERS, DensityModel, assign, density_point
from .vectors import METRIC_NAMES, MetricVector

WEIGHT_FIELDS = ("alpha", "beta", "lambda", "phi")  # BLEU, chrF++, BS-F1, COMET


@dataclass(frozen=True)
class CorrelationRow:
    tier: str
    r_bleu: float
    r_chrfpp: float
    r_bsf1: float
    r_comet: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r_bleu, self.r_chrfpp, self.r_bsf1, self.r_comet)


@dataclass(frozen=True)
class TierWeights:
    """Normalized weights (alpha, beta, lambda, phi) for one density tier."""
    alpha: float
    beta: float
    lam: float
    phi: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.lam, self.phi)

    def __post_init__(self):
        total = sum(self.as_tuple())
        if any(w < 0 for w in self.as_tuple()):
            raise ValueError("weights must be non-negative")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")


@dataclass(frozen=True)
class WeightProfile:
    by_tier: dict[str, TierWeights]

    def weights_for(self, tier: str) -> TierWeights:
        try:
            return self.by_tier[tier]
        except KeyError:
            raise KeyError(f"no weights for tier {tier!r}") from None

    def to_json(self) -> dict:
        return {
            tier: dict(zip(WEIGHT_FIELDS, w.as_tuple()))
            for tier, w in self.by_tier.items()
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightProfile":
        return cls(by_tier={
            tier: TierWeights(*(fields[k] for k in WEIGHT_FIELDS))
            for tier, fields in obj.items()
        })


def save_profile(profile: WeightProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(profile.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_profile(path) -> WeightProfile:
    with open(path, encoding="utf-8") as fh:
        return WeightProfile.from_json(json.load(fh))


@dataclass(frozen=True)
class DAResult:
    id: str
    system: str
    lang: str
    tier: str
    vector: MetricVector
    da_score: float
    arithmetic_mean: float
    weights_renormalized: bool
    dataset: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "system": self.system,
            "lang": self.lang,
            "dataset": self.dataset,
            "tier": self.tier,
            **{m: self.vector.get(m) for m in METRIC_NAMES},
            "da_score": self.da_score,
            "arithmetic_mean": self.arithmetic_mean,
            "weights_renormalized": self.weights_renormalized,
        }


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two equal-length 1-D sequences")
    if len(x) < 2:
        raise ValueError("pearson needs at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc ** 2).sum() * (yc ** 2).sum())
    if denom == 0.0:
        raise ValueError("pearson is undefined when either sequence has zero variance")
    return float(np.clip((xc * yc).sum() / denom, -1.0, 1.0))


def derive_correlations(vectors: list[MetricVector],
                        human_overall: dict[tuple[str, str, str], float],
                        tiers: dict[str, str]) -> list[CorrelationRow]:
    """One correlation row per density tier, using human overall ratings as
    the reference variable. Only pairs with all four metrics and a rating
    contribute; a tier with fewer than 2 such pairs is an error."""
    grouped: dict[str, list[tuple[MetricVector, float]]] = {t: [] for t in TIERS}
    for v in vectors:
        rating = human_overall.get(v.key)
        if rating is None or not v.is_complete():
            continue
        tier = tiers.get(v.id)
        if tier is None:
            continue
        grouped[tier].append((v, rating))

    rows = []
    for tier in TIERS:
        pairs = grouped[tier]
        if len(pairs) < 2:
            raise ValueError(
                f"tier {tier!r} has only {len(pairs)} fully-scored rated pairs; need >= 2"
            )
        humans = [rating for _, rating in pairs]
        rs = [pearson([v.get(m) for v, _ in pairs], humans) for m in METRIC_NAMES]
        rows.append(CorrelationRow(tier, *rs))
    return rows


def normalize_weights(row: CorrelationRow) -> TierWeights:
    """Clamp negative correlations to zero and divide by the sum."""
    clamped = [max(r, 0.0) for r in row.as_tuple()]
    total = sum(clamped)
    if total <= 0.0:
        raise ValueError(f"tier {row.tier!r}: all correlations are non-positive")
    return TierWeights(*(c / total for c in clamped))


def profile_from_correlations(rows: list[CorrelationRow]) -> WeightProfile:
    return WeightProfile(by_tier={row.tier: normalize_weights(row) for row in rows})


def da_score(vector: MetricVector, weights: TierWeights) -> tuple[float, bool]:
    """Weighted combination of the present metrics. When some metrics are
    absent the weights are renormalized over the present ones; the returned
    flag records that this happened."""
    present = vector.present_metrics()
    if not present:
        raise ValueError(f"vector {vector.key} has no metrics present")
    w = dict(zip(METRIC_NAMES, weights.as_tuple()))
    renormalized = len(present) < len(METRIC_NAMES)
    total_w = sum(w[m] for m in present)
    if total_w <= 0.0:
        raise ValueError(f"vector {vector.key}: all weights on present metrics are zero")
    score = sum(w[m] * vector.get(m) for m in present) / total_w
    return score, renormalized


def arithmetic_mean(vector: MetricVector) -> float:
    present = vector.present_metrics()
    if not present:
        raise ValueError(f"vector {vector.key} has no metrics present")
    return sum(vector.get(m) for m in present) / len(present)


def scale_human(overall: float) -> float:
    """Map a human overall rating in [1, 5] onto the 0-100 metric scale."""
    return (overall - 1.0) * 25.0


def score_corpus(corpus: Corpus, vectors: list[MetricVector],
                 model: DensityModel, profile: WeightProfile) -> list[DAResult]:
    """DA-score every vector, assigning each sample's tier with the fitted
    density model. Results are sorted by (id, system, lang)."""
    samples = {s.id: s for s in corpus}
    results = []
    for v in vectors:
        sample = samples.get(v.id)
        if sample is None:
            raise KeyError(f"vector references unknown sample {v.id!r}")
        tier = assign(model, density_point(sample))
        score, renorm = da_score(v, profile.weights_for(tier))
        results.append(DAResult(
            id=v.id, system=v.system, lang=v.lang, tier=tier, vector=v,
            da_score=score, arithmetic_mean=arithmetic_mean(v),
            weights_renormalized=renorm, dataset=sample.dataset,
        ))
    results.sort(key=lambda r: (r.id, r.system, r.lang))
    return results


def human_overall_map(corpus: Corpus) -> dict[tuple[str, str, str], float]:
    """Flatten per-sample human ratings to {(id, system, lang): overall}."""
    out = {}
    for sample in corpus:
        for system, by_lang in sample.human.items():
            for lang, rating in by_lang.items():
                out[(sample.id, system, lang)] = rating.overall
    return out


def correlations_to_csv_rows(rows: list[CorrelationRow]) -> list[list[str]]:
    """Table layout mirroring the published correlation table."""
    out = [["Info. Density", "BLEU", "CHRF++", "BS-F1", "COMET"]]
    for row in rows:
        out.append([row.tier] + [f"{r:.4f}" for r in row.as_tuple()])
    return out
