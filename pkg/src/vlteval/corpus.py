"""Corpus data model: manifest ingestion, validation, and source-text features.

A manifest is UTF-8 JSONL with one sample object per line. Loading is strict
about structure (types, required fields, duplicate ids) but lenient about
semantic invariants, which are reported by :func:`validate` as issues rather
than raised.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

VALID_ERROR_TAGS = ("insertion", "content", "deletion")

_KNOWN_FIELDS = {
    "id", "dataset", "image_ref", "regions", "region_count_override",
    "source_lang", "source_text", "references", "hypotheses", "human",
}

# Script ranges counted one token per codepoint (Han, kana, hangul).
_CJK_RANGES = (
    (0x3040, 0x30FF),   # hiragana + katakana
    (0x3400, 0x4DBF),   # CJK ext A
    (0x4E00, 0x9FFF),   # CJK unified
    (0xAC00, 0xD7AF),   # hangul syllables
    (0xF900, 0xFAFF),   # CJK compatibility
)


class ManifestError(ValueError):
    """Malformed manifest content; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class TextRegion:
    bbox: tuple[float, float, float, float]  # x, y, w, h in pixels
    ocr_raw: str
    ocr_corrected: str | None = None
    error_tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class HumanRating:
    semantic_adequacy: float
    grammatical_correctness: float
    fluency: float
    cultural_appropriateness: float
    overall: float

    def dimension_mean(self) -> float:
        return (self.semantic_adequacy + self.grammatical_correctness
                + self.fluency + self.cultural_appropriateness) / 4.0


@dataclass(frozen=True)
class Sample:
    id: str
    dataset: str
    image_ref: str
    regions: tuple[TextRegion, ...]
    source_lang: str
    source_text: str
    references: dict[str, str]
    hypotheses: dict[str, dict[str, str]]
    human: dict[str, dict[str, HumanRating]] = field(default_factory=dict)
    region_count_override: int | None = None


@dataclass(frozen=True)
class Corpus:
    samples: tuple[Sample, ...]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def get(self, sample_id: str) -> Sample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)


@dataclass(frozen=True)
class Issue:
    sample_id: str
    description: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


LANGUAGE_TIERS = ("High", "Medium", "Low")

# Default language-resource tier map for the seven AibTrans target languages.
DEFAULT_LANGUAGE_TIERS: dict[str, str] = {
    "en": "High",
    "de": "Medium", "es": "Medium", "ja": "Medium",
    "ar": "Low", "ru": "Low", "hi": "Low",
}


@dataclass(frozen=True)
class LanguageTierMap:
    tiers: dict[str, str]

    def __post_init__(self):
        for lang, tier in self.tiers.items():
            if tier not in LANGUAGE_TIERS:
                raise ValueError(f"unknown language tier {tier!r} for {lang!r}")

    def tier_of(self, lang: str) -> str:
        try:
            return self.tiers[lang]
        except KeyError:
            raise KeyError(f"no language-resource tier mapped for {lang!r}") from None


def _require(obj: dict, key: str, typ, line: int):
    if key not in obj:
        raise ManifestError(f"missing required field {key!r}", line)
    value = obj[key]
    if not isinstance(value, typ):
        raise ManifestError(f"field {key!r} has wrong type {type(value).__name__}", line)
    return value


def _parse_region(raw: dict, line: int) -> TextRegion:
    bbox = _require(raw, "bbox", list, line)
    if len(bbox) != 4 or not all(isinstance(v, (int, float)) for v in bbox):
        raise ManifestError("bbox must be [x, y, w, h] numbers", line)
    tags = raw.get("error_tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ManifestError("error_tags must be a list of strings", line)
    corrected = raw.get("ocr_corrected")
    if corrected is not None and not isinstance(corrected, str):
        raise ManifestError("ocr_corrected must be a string", line)
    return TextRegion(
        bbox=tuple(float(v) for v in bbox),
        ocr_raw=_require(raw, "ocr_raw", str, line),
        ocr_corrected=corrected,
        error_tags=frozenset(tags),
    )


def _parse_rating(raw: dict, line: int) -> HumanRating:
    vals = {}
    for key in ("sem", "gram", "flu", "cult", "overall"):
        v = raw.get(key)
        if not isinstance(v, (int, float)):
            raise ManifestError(f"human rating field {key!r} must be a number", line)
        vals[key] = float(v)
    return HumanRating(
        semantic_adequacy=vals["sem"],
        grammatical_correctness=vals["gram"],
        fluency=vals["flu"],
        cultural_appropriateness=vals["cult"],
        overall=vals["overall"],
    )


def parse_sample(obj: dict, line: int = 0) -> Sample:
    unknown = set(obj) - _KNOWN_FIELDS
    if unknown:
        warnings.warn(f"line {line}: ignoring unknown manifest fields {sorted(unknown)}")

    regions_raw = obj.get("regions", [])
    if not isinstance(regions_raw, list):
        raise ManifestError("regions must be a list", line)
    regions = tuple(_parse_region(r, line) for r in regions_raw)

    references = _require(obj, "references", dict, line)
    hypotheses = _require(obj, "hypotheses", dict, line)
    for system, by_lang in hypotheses.items():
        if not isinstance(by_lang, dict):
            raise ManifestError(f"hypotheses[{system!r}] must map lang to text", line)

    human_raw = obj.get("human") or {}
    human = {
        system: {lang: _parse_rating(r, line) for lang, r in by_lang.items()}
        for system, by_lang in human_raw.items()
    }

    override = obj.get("region_count_override")
    if override is not None and not isinstance(override, int):
        raise ManifestError("region_count_override must be an integer", line)

    return Sample(
        id=_require(obj, "id", str, line),
        dataset=_require(obj, "dataset", str, line),
        image_ref=_require(obj, "image_ref", str, line),
        regions=regions,
        source_lang=_require(obj, "source_lang", str, line),
        source_text=_require(obj, "source_text", str, line),
        references=dict(references),
        hypotheses={s: dict(m) for s, m in hypotheses.items()},
        human=human,
        region_count_override=override,
    )


def load_manifest(path) -> Corpus:
    """Load a JSONL manifest, preserving file order and rejecting duplicate ids."""
    samples: list[Sample] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            if not raw_line.strip():
                continue
            try:
                obj = json.loads(raw_line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON: {exc.msg}", lineno) from exc
            if not isinstance(obj, dict):
                raise ManifestError("each line must be a JSON object", lineno)
            sample = parse_sample(obj, lineno)
            if sample.id in seen:
                raise ManifestError(
                    f"duplicate sample id {sample.id!r} (first seen on line {seen[sample.id]})",
                    lineno,
                )
            seen[sample.id] = lineno
            samples.append(sample)
    return Corpus(samples=tuple(samples))


def sample_to_dict(sample: Sample) -> dict:
    obj: dict = {
        "id": sample.id,
        "dataset": sample.dataset,
        "image_ref": sample.image_ref,
        "regions": [
            {
                "bbox": list(r.bbox),
                "ocr_raw": r.ocr_raw,
                **({"ocr_corrected": r.ocr_corrected} if r.ocr_corrected is not None else {}),
                "error_tags": sorted(r.error_tags),
            }
            for r in sample.regions
        ],
        "source_lang": sample.source_lang,
        "source_text": sample.source_text,
        "references": sample.references,
        "hypotheses": sample.hypotheses,
    }
    if sample.region_count_override is not None:
        obj["region_count_override"] = sample.region_count_override
    if sample.human:
        obj["human"] = {
            system: {
                lang: {
                    "sem": r.semantic_adequacy,
                    "gram": r.grammatical_correctness,
                    "flu": r.fluency,
                    "cult": r.cultural_appropriateness,
                    "overall": r.overall,
                }
                for lang, r in by_lang.items()
            }
            for system, by_lang in sample.human.items()
        }
    return obj


def serialize_manifest(corpus: Corpus, path) -> None:
    """Write a corpus back to JSONL; load_manifest(serialize(c)) == c."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample in corpus:
            fh.write(json.dumps(sample_to_dict(sample), ensure_ascii=False) + "\n")


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str, lang: str = "und") -> list[str]:
    """Segment text into tokens: whitespace-delimited words, with CJK
    codepoints emitted individually (mixed-script chunks yield one token per
    CJK character plus one per maximal non-CJK run)."""
    tokens: list[str] = []
    for chunk in text.split():
        run: list[str] = []
        for ch in chunk:
            if _is_cjk(ch):
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


def token_length(text: str, lang: str = "und") -> int:
    """Deterministic token count of ``text`` under the toolkit tokenizer."""
    return len(tokenize(text, lang))


def region_count(sample: Sample) -> int:
    """Number of text regions, or the explicit metadata override when the
    manifest ships no geometry."""
    if sample.regions:
        return len(sample.regions)
    if sample.region_count_override is not None:
        return sample.region_count_override
    raise ValueError(
        f"sample {sample.id!r} has no regions and no region_count_override"
    )


def validate(corpus: Corpus) -> ValidationReport:
    """Check corpus invariants; returns issues as data, never raises."""
    issues: list[Issue] = []
    for sample in corpus:
        for i, region in enumerate(sample.regions):
            x, y, w, h = region.bbox
            if w <= 0 or h <= 0:
                issues.append(Issue(sample.id, f"region {i}: bbox w/h must be positive"))
            unknown = region.error_tags - set(VALID_ERROR_TAGS)
            if unknown:
                issues.append(Issue(sample.id, f"region {i}: unknown error tags {sorted(unknown)}"))
            unchanged = region.ocr_corrected is None or region.ocr_corrected == region.ocr_raw
            if unchanged and region.error_tags:
                issues.append(Issue(sample.id, f"region {i}: error tags on an uncorrected region"))
            if not unchanged and not region.error_tags:
                issues.append(Issue(sample.id, f"region {i}: corrected region without error tags"))
        for system, by_lang in sample.hypotheses.items():
            for lang in by_lang:
                if lang not in sample.references:
                    issues.append(Issue(
                        sample.id,
                        f"hypothesis {system!r} targets {lang!r} but no {lang!r} reference exists",
                    ))
        for system, by_lang in sample.human.items():
            for lang, rating in by_lang.items():
                for name, v in (
                    ("sem", rating.semantic_adequacy),
                    ("gram", rating.grammatical_correctness),
                    ("flu", rating.fluency),
                    ("cult", rating.cultural_appropriateness),
                    ("overall", rating.overall),
                ):
                    if not 1.0 <= v <= 5.0:
                        issues.append(Issue(
                            sample.id, f"human[{system}][{lang}].{name} = {v} outside [1, 5]"))
                if abs(rating.overall - rating.dimension_mean()) > 1e-9:
                    issues.append(Issue(
                        sample.id,
                        f"human[{system}][{lang}].overall = {rating.overall} but dimension "
                        f"mean is {rating.dimension_mean()}",
                    ))
    return ValidationReport(issues=tuple(issues))
