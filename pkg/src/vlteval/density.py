"""Information-density taxonomy: K-means over (region count, token length).

Features are z-score standardized before clustering, and the fitted clusters
are labeled Low/Medium/High by ascending token-length centroid so tier names
are stable regardless of cluster indexing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Sample, region_count, token_length

TIERS = ("Low", "Medium", "High")

DEFAULT_K = 3
DEFAULT_SEED = 42
MAX_ITER = 300
CONVERGENCE_TOL = 1e-9


@dataclass(frozen=True)
class DensityPoint:
    sample_id: str
    bbox_count: int
    token_len: int


@dataclass(frozen=True, eq=False)
class DensityModel:
    k: int
    centroids: np.ndarray           # (k, 2) in standardized feature space
    feature_means: np.ndarray       # (2,)
    feature_stds: np.ndarray        # (2,)
    tier_of_cluster: dict[int, str]
    seed: int

    def standardize(self, bbox_count: float, token_len: float) -> np.ndarray:
        raw = np.array([bbox_count, token_len], dtype=float)
        return (raw - self.feature_means) / self.feature_stds

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "centroids": self.centroids.tolist(),
            "feature_means": self.feature_means.tolist(),
            "feature_stds": self.feature_stds.tolist(),
            "tier_of_cluster": {str(i): t for i, t in self.tier_of_cluster.items()},
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DensityModel":
        return cls(
            k=obj["k"],
            centroids=np.asarray(obj["centroids"], dtype=float),
            feature_means=np.asarray(obj["feature_means"], dtype=float),
            feature_stds=np.asarray(obj["feature_stds"], dtype=float),
            tier_of_cluster={int(i): t for i, t in obj["tier_of_cluster"].items()},
            seed=obj["seed"],
        )


def save_model(model: DensityModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> DensityModel:
    with open(path, encoding="utf-8") as fh:
        return DensityModel.from_json(json.load(fh))


def density_point(sample: Sample) -> DensityPoint:
    return DensityPoint(
        sample_id=sample.id,
        bbox_count=region_count(sample),
        token_len=token_length(sample.source_text, sample.source_lang),
    )


def corpus_points(corpus: Corpus) -> list[DensityPoint]:
    return [density_point(s) for s in corpus]


def _kmeans_pp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    dist_sq = np.sum((data - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = dist_sq.sum()
        if total == 0.0:
            centers[j] = data[rng.integers(n)]
        else:
            probs = dist_sq / total
            centers[j] = data[rng.choice(n, p=probs)]
        dist_sq = np.minimum(dist_sq, np.sum((data - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(data: np.ndarray, centers: np.ndarray,
           inertia_log: list[float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    k = centers.shape[0]
    for _ in range(MAX_ITER):
        dists = np.sum((data[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dists, axis=1)
        if inertia_log is not None:
            inertia_log.append(float(dists[np.arange(len(data)), labels].sum()))
        new_centers = centers.copy()
        for j in range(k):
            members = data[labels == j]
            if len(members):
                new_centers[j] = members.mean(axis=0)
            else:
                # deterministic empty-cluster repair: farthest point from its center
                worst = int(np.argmax(dists[np.arange(len(data)), labels]))
                new_centers[j] = data[worst]
        movement = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        if movement < CONVERGENCE_TOL:
            break
    dists = np.sum((data[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return centers, np.argmin(dists, axis=1)


def fit(points: list[DensityPoint], k: int = DEFAULT_K, seed: int = DEFAULT_SEED,
        unit_variance_fallback: bool = False,
        inertia_log: list[float] | None = None) -> DensityModel:
    """Fit seeded K-means on standardized (bbox_count, token_len) features.

    The run is invariant to input order: points are sorted canonically before
    initialization, so a permuted corpus refits to the same model.
    """
    if len(points) < k:
        raise ValueError(f"need at least k={k} points, got {len(points)}")
    if not 1 <= k <= len(TIERS):
        raise ValueError(f"k must be in [1, {len(TIERS)}] for tier labeling, got {k}")

    raw = np.array([[p.bbox_count, p.token_len] for p in points], dtype=float)
    means = raw.mean(axis=0)
    stds = raw.std(axis=0)
    if np.any(stds == 0.0):
        if not unit_variance_fallback:
            raise ValueError(
                "a feature has zero variance; refit with unit_variance_fallback=True "
                "to standardize that feature with unit variance"
            )
        stds = np.where(stds == 0.0, 1.0, stds)
    data = (raw - means) / stds

    # canonical order makes k-means++ draws independent of caller ordering
    order = np.lexsort((data[:, 1], data[:, 0]))
    canonical = data[order]

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(canonical, k, rng)
    centers, _ = _lloyd(canonical, centers, inertia_log)

    # Low/Medium/High by ascending token-length centroid, ties by bbox count
    ranked = sorted(range(k), key=lambda j: (centers[j][1], centers[j][0]))
    tier_of_cluster = {j: TIERS[rank] for rank, j in enumerate(ranked)}

    return DensityModel(
        k=k,
        centroids=centers,
        feature_means=means,
        feature_stds=stds,
        tier_of_cluster=tier_of_cluster,
        seed=seed,
    )


def assign(model: DensityModel, point: DensityPoint) -> str:
    """Tier of the nearest centroid in standardized space; exact distance
    ties go to the lowest cluster index."""
    z = model.standardize(point.bbox_count, point.token_len)
    dists = np.sum((model.centroids - z) ** 2, axis=1)
    return model.tier_of_cluster[int(np.argmin(dists))]


def assign_corpus(model: DensityModel, corpus: Corpus) -> dict[str, str]:
    return {s.id: assign(model, density_point(s)) for s in corpus}
