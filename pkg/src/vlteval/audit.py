"""OCR-correction error taxonomy statistics over annotated manifests.

Sentence-level classes come from each region's error tags; image-level
classes from the union of a sample's region tags. Percentages are reported
over two bases (all regions, and erroneous regions only) because published
error breakdowns mix the two.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

from .corpus import Corpus, TextRegion

SENTENCE_CLASSES = (
    "error_free", "insertion_only", "content_only", "insertion_and_content", "other",
)
IMAGE_CLASSES = (
    "fully_accurate", "insertion_only", "content_only", "both", "all_three",
)


@dataclass(frozen=True)
class AuditSummary:
    sentence_fractions: dict[str, float]      # over all regions
    erroneous_fractions: dict[str, float]     # over erroneous regions only
    image_fractions: dict[str, float]         # over all images
    total_regions: int
    total_images: int

    def to_json(self) -> dict:
        return {
            "total_regions": self.total_regions,
            "total_images": self.total_images,
            "sentence_fractions": self.sentence_fractions,
            "erroneous_fractions": self.erroneous_fractions,
            "image_fractions": self.image_fractions,
        }


def classify_sentence(region: TextRegion) -> str:
    tags = region.error_tags
    if not tags:
        return "error_free"
    if tags == {"insertion"}:
        return "insertion_only"
    if tags == {"content"}:
        return "content_only"
    if tags == {"insertion", "content"}:
        return "insertion_and_content"
    return "other"


def _classify_image(union_tags: frozenset[str]) -> str:
    if not union_tags:
        return "fully_accurate"
    if len(union_tags) >= 3:
        return "all_three"
    if union_tags >= {"insertion", "content"}:
        return "both"
    if "insertion" in union_tags:
        return "insertion_only"
    if "content" in union_tags:
        return "content_only"
    return "both"  # two non-insertion/content tags: most severe two-class bucket


def summarize(corpus: Corpus) -> AuditSummary:
    """Aggregate sentence- and image-level error distributions; order of
    samples never affects the result."""
    sentence_counts = {c: 0 for c in SENTENCE_CLASSES}
    image_counts = {c: 0 for c in IMAGE_CLASSES}
    total_regions = 0
    total_images = 0
    for sample in corpus:
        if not sample.regions:
            continue
        total_images += 1
        union: frozenset[str] = frozenset()
        for region in sample.regions:
            total_regions += 1
            sentence_counts[classify_sentence(region)] += 1
            union |= region.error_tags
        image_counts[_classify_image(union)] += 1
    if total_regions == 0:
        raise ValueError("corpus has no annotated regions to audit")

    erroneous = total_regions - sentence_counts["error_free"]
    erroneous_fractions = {
        c: (sentence_counts[c] / erroneous if erroneous else 0.0)
        for c in SENTENCE_CLASSES if c != "error_free"
    }
    return AuditSummary(
        sentence_fractions={c: sentence_counts[c] / total_regions for c in SENTENCE_CLASSES},
        erroneous_fractions=erroneous_fractions,
        image_fractions={c: image_counts[c] / total_images for c in IMAGE_CLASSES},
        total_regions=total_regions,
        total_images=total_images,
    )


def write_json(summary: AuditSummary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(summary: AuditSummary, path) -> None:
    """Two-section CSV: sentence-level then image-level distributions."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "class", "fraction"])
        for c in SENTENCE_CLASSES:
            writer.writerow(["sentence", c, f"{summary.sentence_fractions[c]:.4f}"])
        for c in IMAGE_CLASSES:
            writer.writerow(["image", c, f"{summary.image_fractions[c]:.4f}"])
