"""Sentence-level lexical and character metrics: BLEU, chrF, chrF++, TER.

All scores are reported on a 0-100 scale. Everything here is a pure function
of its inputs; repeated evaluation is bit-identical.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .corpus import Sample, tokenize
from .vectors import MetricVector

EPSILON_ADD = "epsilon-add"
EXPONENTIAL_FLOOR = "exponential-floor"


@dataclass(frozen=True)
class BleuConfig:
    max_ngram_order: int = 4
    smoothing: str = EPSILON_ADD
    epsilon: float = 0.1

    def __post_init__(self):
        if not 1 <= self.max_ngram_order <= 9:
            raise ValueError(f"max_ngram_order must be in [1, 9], got {self.max_ngram_order}")
        if self.smoothing not in (EPSILON_ADD, EXPONENTIAL_FLOOR, "none"):
            raise ValueError(f"unknown smoothing {self.smoothing!r}")


@dataclass(frozen=True)
class ChrfConfig:
    char_order: int = 6
    word_order: int = 0  # 0 for chrF, 2 for chrF++
    beta: float = 2.0

    def __post_init__(self):
        if self.char_order < 1:
            raise ValueError("char_order must be >= 1")
        if self.word_order < 0:
            raise ValueError("word_order must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


CHRFPP_CONFIG = ChrfConfig(char_order=6, word_order=2, beta=2.0)


def _ngrams(items, n: int) -> Counter:
    return Counter(tuple(items[i:i + n]) for i in range(len(items) - n + 1))


def sentence_bleu(hypothesis: str, reference: str,
                  cfg: BleuConfig = BleuConfig(), lang: str = "und") -> float:
    """Modified n-gram precision geometric mean times brevity penalty, x100."""
    ref_tokens = tokenize(reference, lang)
    if not ref_tokens:
        raise ValueError("BLEU is undefined for an empty reference")
    hyp_tokens = tokenize(hypothesis, lang)
    if not hyp_tokens:
        return 0.0

    log_sum = 0.0
    effective_orders = 0
    floor_exponent = 0
    for n in range(1, cfg.max_ngram_order + 1):
        hyp_ngrams = _ngrams(hyp_tokens, n)
        total = sum(hyp_ngrams.values())
        if total == 0:
            continue
        ref_ngrams = _ngrams(ref_tokens, n)
        matches = sum(min(count, ref_ngrams[g]) for g, count in hyp_ngrams.items())
        if matches == 0:
            if cfg.smoothing == EPSILON_ADD:
                p_n = cfg.epsilon / total
            elif cfg.smoothing == EXPONENTIAL_FLOOR:
                floor_exponent += 1
                p_n = 1.0 / (2 ** floor_exponent * total)
            else:
                return 0.0
        else:
            p_n = matches / total
        log_sum += math.log(p_n)
        effective_orders += 1

    if effective_orders == 0:
        return 0.0
    geo_mean = math.exp(log_sum / effective_orders)
    hyp_len, ref_len = len(hyp_tokens), len(ref_tokens)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return geo_mean * bp * 100.0


def chrf(hypothesis: str, reference: str,
         cfg: ChrfConfig = ChrfConfig(), lang: str = "und") -> float:
    """Character (and optionally word) n-gram F-beta score, x100.

    Precision and recall are macro-averaged over all effective orders (char
    orders 1..char_order on whitespace-stripped text, plus word orders
    1..word_order when configured), then combined into a single F-beta.
    """
    if not hypothesis and not reference:
        raise ValueError("chrF is undefined when both strings are empty")

    hyp_chars = "".join(hypothesis.split())
    ref_chars = "".join(reference.split())
    pools: list[tuple[Counter, Counter]] = []
    for n in range(1, cfg.char_order + 1):
        pools.append((_ngrams(hyp_chars, n), _ngrams(ref_chars, n)))
    if cfg.word_order > 0:
        hyp_words = tokenize(hypothesis, lang)
        ref_words = tokenize(reference, lang)
        for n in range(1, cfg.word_order + 1):
            pools.append((_ngrams(hyp_words, n), _ngrams(ref_words, n)))

    precisions: list[float] = []
    recalls: list[float] = []
    for hyp_ngrams, ref_ngrams in pools:
        hyp_total = sum(hyp_ngrams.values())
        ref_total = sum(ref_ngrams.values())
        if hyp_total == 0 and ref_total == 0:
            continue  # order longer than both strings; not an effective order
        matches = sum(min(count, ref_ngrams[g]) for g, count in hyp_ngrams.items())
        precisions.append(matches / hyp_total if hyp_total else 0.0)
        recalls.append(matches / ref_total if ref_total else 0.0)

    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    beta_sq = cfg.beta ** 2
    denom = beta_sq * avg_p + avg_r
    if denom == 0.0:
        return 0.0
    return (1 + beta_sq) * avg_p * avg_r / denom * 100.0


def chrfpp(hypothesis: str, reference: str, lang: str = "und") -> float:
    return chrf(hypothesis, reference, CHRFPP_CONFIG, lang)


def _edit_distance(a: list[str], b: list[str]) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        cur = [i]
        for j, tok_b in enumerate(b, start=1):
            cost = 0 if tok_a == tok_b else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


_MAX_SHIFT_LEN = 10


def _candidate_shifts(hyp: list[str], ref: list[str]):
    """Yield hypotheses reachable by one block shift of a span that occurs
    contiguously in the reference."""
    ref_spans = set()
    for length in range(1, min(len(ref), _MAX_SHIFT_LEN) + 1):
        for j in range(len(ref) - length + 1):
            ref_spans.add(tuple(ref[j:j + length]))
    for length in range(1, min(len(hyp), _MAX_SHIFT_LEN) + 1):
        for i in range(len(hyp) - length + 1):
            span = tuple(hyp[i:i + length])
            if span not in ref_spans:
                continue
            rest = hyp[:i] + hyp[i + length:]
            for j in range(len(rest) + 1):
                if j == i:
                    continue
                yield rest[:j] + list(span) + rest[j:]


def ter(hypothesis: str, reference: str, lang: str = "und") -> float:
    """Translation edit rate: edits (insert/delete/substitute/block-shift)
    per reference token, x100. Shift selection is greedy: the single shift
    that most reduces the remaining edit distance is applied, repeatedly."""
    ref_tokens = tokenize(reference, lang)
    if not ref_tokens:
        raise ValueError("TER is undefined for an empty reference")
    hyp_tokens = tokenize(hypothesis, lang)

    shifts = 0
    current = hyp_tokens
    base = _edit_distance(current, ref_tokens)
    while base > 0:
        best = None
        best_dist = base
        for shifted in _candidate_shifts(current, ref_tokens):
            d = _edit_distance(shifted, ref_tokens)
            if d < best_dist:
                best_dist = d
                best = shifted
        if best is None:
            break
        current = best
        base = best_dist
        shifts += 1
    return (shifts + base) / len(ref_tokens) * 100.0


def _lookup_pair(sample: Sample, system: str, target_lang: str) -> tuple[str, str]:
    try:
        hypothesis = sample.hypotheses[system][target_lang]
    except KeyError:
        raise KeyError(
            f"sample {sample.id!r} has no hypothesis for system {system!r} "
            f"in language {target_lang!r}"
        ) from None
    reference = sample.references.get(target_lang)
    if reference is None:
        raise KeyError(
            f"sample {sample.id!r} has no reference in language {target_lang!r}"
        )
    return hypothesis, reference


def score_pair(sample: Sample, system: str, target_lang: str,
               bleu_cfg: BleuConfig = BleuConfig(),
               chrf_cfg: ChrfConfig = CHRFPP_CONFIG) -> MetricVector:
    """Score one (sample, system, target-language) pair with the native
    lexical metrics; returns a partial vector (BLEU + chrF++ filled)."""
    hypothesis, reference = _lookup_pair(sample, system, target_lang)
    vector = MetricVector(id=sample.id, system=system, lang=target_lang)
    vector = vector.with_score(
        "bleu", sentence_bleu(hypothesis, reference, bleu_cfg, target_lang), "native")
    vector = vector.with_score(
        "chrfpp", chrf(hypothesis, reference, chrf_cfg, target_lang), "native")
    return vector


def auxiliary_scores(sample: Sample, system: str, target_lang: str,
                     with_ter: bool = True, with_chrf: bool = True) -> dict[str, float]:
    """TER and plain chrF for a pair, on request (not part of the DA vector)."""
    hypothesis, reference = _lookup_pair(sample, system, target_lang)
    out: dict[str, float] = {}
    if with_ter:
        out["ter"] = ter(hypothesis, reference, target_lang)
    if with_chrf:
        out["chrf"] = chrf(hypothesis, reference, ChrfConfig(), target_lang)
    return out
