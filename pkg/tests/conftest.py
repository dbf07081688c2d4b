import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from vlteval.corpus import HumanRating, Sample, TextRegion
from vlteval.vectors import MetricVector

TIER_CENTERS = {"Low": (5, 15), "Medium": (12, 40), "High": (20, 70)}

# Per-tier ground-truth convex weights for the synthetic calibration corpus.
TRUE_WEIGHTS = {
    "Low": (0.10, 0.15, 0.30, 0.45),
    "Medium": (0.40, 0.30, 0.20, 0.10),
    "High": (0.15, 0.40, 0.35, 0.10),
}


def make_region(raw="abc", corrected=None, tags=(), bbox=(0, 0, 10, 10)):
    return TextRegion(bbox=tuple(float(v) for v in bbox), ocr_raw=raw,
                      ocr_corrected=corrected, error_tags=frozenset(tags))


def make_rating(sem=4, gram=4, flu=4, cult=4, overall=None):
    if overall is None:
        overall = (sem + gram + flu + cult) / 4
    return HumanRating(sem, gram, flu, cult, overall)


def make_sample(id="s1", dataset="demo", regions=None, source_text="你好 世界",
                references=None, hypotheses=None, human=None, override=None,
                source_lang="zh"):
    return Sample(
        id=id, dataset=dataset, image_ref=f"img/{id}.png",
        regions=tuple(regions or ()), source_lang=source_lang,
        source_text=source_text,
        references=references if references is not None else {"en": "hello world"},
        hypotheses=hypotheses if hypotheses is not None else {"sysA": {"en": "hello world"}},
        human=human or {}, region_count_override=override,
    )


def sample_json(id="s1", **kw):
    obj = {
        "id": id, "dataset": kw.get("dataset", "demo"),
        "image_ref": f"img/{id}.png",
        "regions": kw.get("regions", [
            {"bbox": [0, 0, 10, 10], "ocr_raw": "abc", "error_tags": []},
        ]),
        "source_lang": kw.get("source_lang", "zh"),
        "source_text": kw.get("source_text", "你好 世界"),
        "references": kw.get("references", {"en": "hello world"}),
        "hypotheses": kw.get("hypotheses", {"sysA": {"en": "hello world"}}),
    }
    for key in ("region_count_override", "human"):
        if key in kw:
            obj[key] = kw[key]
    return obj


def write_manifest(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return path


def synthetic_calibration_corpus(seed=7, n_per_tier=500, noise_sigma=2.0):
    """Vectors, human ratings, tiers, and density points whose human scores
    are a known per-tier convex combination of the four metrics plus noise.

    Returns (vectors, human_overall, tier_of_sample, points).
    """
    rng = np.random.default_rng(seed)
    vectors, human, tiers, points = [], {}, {}, []
    from vlteval.density import DensityPoint

    for tier, (bc, tl) in TIER_CENTERS.items():
        w = TRUE_WEIGHTS[tier]
        for i in range(n_per_tier):
            sid = f"{tier.lower()}{i:04d}"
            metrics = rng.uniform(20.0, 90.0, size=4)
            scaled = float(np.dot(w, metrics) + rng.normal(0.0, noise_sigma))
            scaled = min(max(scaled, 0.0), 100.0)
            vectors.append(MetricVector(
                sid, "sys", "en",
                bleu=float(metrics[0]), chrfpp=float(metrics[1]),
                bsf1=float(metrics[2]), comet=float(metrics[3]),
            ))
            human[(sid, "sys", "en")] = scaled / 25.0 + 1.0
            tiers[sid] = tier
            points.append(DensityPoint(
                sample_id=sid,
                bbox_count=max(1, int(round(bc + rng.normal(0, 1.0)))),
                token_len=max(1, int(round(tl + rng.normal(0, 2.0)))),
            ))
    return vectors, human, tiers, points


def blob_points(seed=0, n_per_blob=40):
    """Three well-separated synthetic blobs with known tier membership."""
    rng = np.random.default_rng(seed)
    from vlteval.density import DensityPoint
    points, truth = [], {}
    for tier, (bc, tl) in TIER_CENTERS.items():
        for i in range(n_per_blob):
            sid = f"{tier}-{i}"
            points.append(DensityPoint(
                sample_id=sid,
                bbox_count=max(0, int(round(bc + rng.normal(0, 0.8)))),
                token_len=max(1, int(round(tl + rng.normal(0, 2.0)))),
            ))
            truth[sid] = tier
    return points, truth


@pytest.fixture
def tmp_manifest(tmp_path):
    def build(objs, name="manifest.jsonl"):
        return write_manifest(tmp_path / name, objs)
    return build
