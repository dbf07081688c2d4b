"""LLM-as-judge client for the four-dimension translation quality protocol.

Responses are cached in an append-only JSONL keyed by a hash of (provider,
model, prompt), so a replay run never touches the network. The overall score
is always recomputed locally from the four dimension scores.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

logger = logging.getLogger(__name__)

DIMENSIONS = (
    "semantic_adequacy",
    "grammatical_correctness",
    "fluency",
    "cultural_appropriateness",
)

_DIMENSION_DEFINITIONS = {
    "semantic_adequacy":
        "whether the translation accurately conveys the meaning of the source sentence",
    "grammatical_correctness":
        "whether the translation conforms to the grammatical rules of the target language",
    "fluency":
        "whether the translation reads smoothly and naturally to native speakers",
    "cultural_appropriateness":
        "whether the translation aligns with cultural norms and avoids "
        "misunderstandings or offensive expressions",
}

PROMPT_VERSION = "judge-prompt-v1"

LOW_QUALITY_THRESHOLD = 4.3


class JudgeParseError(ValueError):
    pass


class JudgeUnavailableError(RuntimeError):
    pass


@dataclass(frozen=True)
class JudgeRequest:
    source_text: str
    candidate_text: str
    source_lang: str
    target_lang: str


@dataclass(frozen=True)
class JudgeResponse:
    scores: dict[str, int]        # dimension name -> integer in [1, 5]
    rationales: dict[str, str]
    overall: float

    @classmethod
    def from_scores(cls, scores: dict[str, int],
                    rationales: dict[str, str] | None = None) -> "JudgeResponse":
        overall = sum(scores[d] for d in DIMENSIONS) / len(DIMENSIONS)
        return cls(scores=dict(scores), rationales=dict(rationales or {}), overall=overall)


@dataclass(frozen=True)
class ProviderConfig:
    provider_id: str
    model: str
    base_url: str = ""
    token_env: str = "VLTEVAL_JUDGE_TOKEN"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 0.5
    concurrency: int = 4
    offline: bool = False


def build_prompt(req: JudgeRequest) -> str:
    """Deterministic judging prompt with the four dimension definitions and a
    machine-parseable score block."""
    lines = [
        f"You are a professional evaluator of translations from {req.source_lang} "
        f"to {req.target_lang}.",
        "",
        "Rate the candidate translation of the source sentence on four dimensions, "
        "assigning an integer score from 1 to 5 for each dimension, with a brief "
        "explanation:",
    ]
    for dim in DIMENSIONS:
        title = dim.replace("_", " ").title()
        lines.append(f"- {title}: {_DIMENSION_DEFINITIONS[dim]}.")
    lines += [
        "",
        f"Source ({req.source_lang}): {req.source_text}",
        f"Candidate ({req.target_lang}): {req.candidate_text}",
        "",
        "Answer with exactly one line per dimension, in this format:",
    ]
    for dim in DIMENSIONS:
        lines.append(f"{dim}: <score 1-5> | <brief explanation>")
    return "\n".join(lines)


_SCORE_LINE = re.compile(
    r"^\s*(?P<dim>[a-z_]+)\s*:\s*(?P<score>-?\d+)\s*(?:\|\s*(?P<why>.*))?$",
    re.MULTILINE,
)


def parse_response(raw: str) -> JudgeResponse:
    """Extract the four integer scores; overall is computed locally and never
    trusted from the judge."""
    scores: dict[str, int] = {}
    rationales: dict[str, str] = {}
    for match in _SCORE_LINE.finditer(raw):
        dim = match.group("dim")
        if dim not in DIMENSIONS:
            continue
        if dim in scores:
            raise JudgeParseError(f"duplicate score for dimension {dim!r}")
        score = int(match.group("score"))
        if not 1 <= score <= 5:
            raise JudgeParseError(f"score {score} for {dim!r} outside [1, 5]")
        scores[dim] = score
        rationales[dim] = (match.group("why") or "").strip()
    missing = [d for d in DIMENSIONS if d not in scores]
    if missing:
        raise JudgeParseError(f"response is missing dimensions {missing}")
    return JudgeResponse.from_scores(scores, rationales)


def cache_key(provider_id: str, model: str, prompt: str) -> str:
    digest = hashlib.sha256(
        f"{provider_id}\n{model}\n{PROMPT_VERSION}\n{prompt}".encode("utf-8")
    )
    return digest.hexdigest()


class JudgeCache:
    """Append-only JSONL cache of raw judge responses."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._entries: dict[str, str] = {}
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    self._entries[obj["key"]] = obj["raw_response"]

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def put(self, key: str, prompt: str, raw_response: str) -> None:
        with self._lock:
            if key in self._entries:
                return
            self._entries[key] = raw_response
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({
                        "key": key,
                        "prompt": prompt,
                        "raw_response": raw_response,
                        "timestamp": time.time(),
                    }, ensure_ascii=False) + "\n")


def _http_transport(provider: ProviderConfig):
    def call(prompt: str) -> str:
        token = os.environ.get(provider.token_env, "")
        resp = requests.post(
            f"{provider.base_url.rstrip('/')}/chat/completions",
            headers={"Authorization": f"Bearer {token}"},
            json={
                "model": provider.model,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": provider.temperature,
            },
            timeout=provider.timeout,
        )
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]
    return call


@dataclass
class JudgeOutcome:
    request: JudgeRequest
    response: JudgeResponse | None = None
    error: str | None = None
    from_cache: bool = False


@dataclass
class BatchStats:
    provider_calls: int = 0
    cache_hits: int = 0
    failures: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def judge_batch(requests_: list[JudgeRequest], provider: ProviderConfig,
                cache: JudgeCache, transport=None,
                stats: BatchStats | None = None) -> list[JudgeOutcome]:
    """Judge a batch with bounded concurrency, per-request retry, and cache
    bypass. A request that exhausts its retries is recorded as a failure; the
    rest of the batch still completes."""
    if transport is None and not provider.offline:
        transport = _http_transport(provider)
    stats = stats if stats is not None else BatchStats()

    def one(req: JudgeRequest) -> JudgeOutcome:
        prompt = build_prompt(req)
        key = cache_key(provider.provider_id, provider.model, prompt)
        raw = cache.get(key)
        if raw is not None:
            with stats._lock:
                stats.cache_hits += 1
            try:
                return JudgeOutcome(req, response=parse_response(raw), from_cache=True)
            except JudgeParseError as exc:
                return JudgeOutcome(req, error=f"cached response unparseable: {exc}")
        if provider.offline:
            return JudgeOutcome(
                req, error=f"offline mode and no cached response for key {key[:12]}... "
                           f"(source {req.source_text!r} -> {req.target_lang})")
        last_error = "no attempts made"
        for attempt in range(provider.max_retries):
            try:
                with stats._lock:
                    stats.provider_calls += 1
                raw = transport(prompt)
                response = parse_response(raw)
                cache.put(key, prompt, raw)
                return JudgeOutcome(req, response=response)
            except Exception as exc:  # noqa: BLE001 - any provider failure retries
                last_error = str(exc)
                if attempt + 1 < provider.max_retries:
                    time.sleep(provider.backoff * (2 ** attempt))
        return JudgeOutcome(req, error=f"exhausted retries: {last_error}")

    with ThreadPoolExecutor(max_workers=max(1, provider.concurrency)) as pool:
        outcomes = list(pool.map(one, requests_))
    stats.failures += sum(1 for o in outcomes if o.error is not None)
    return outcomes


def low_scoring_dimensions(response: JudgeResponse,
                           threshold: float = LOW_QUALITY_THRESHOLD) -> list[str]:
    """Dimensions scored below the reference-quality filtering threshold."""
    return [d for d in DIMENSIONS if response.scores[d] < threshold]
