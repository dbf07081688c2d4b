"""Streaming serve loop for the JSONL scoring protocol."""

from __future__ import annotations

import json

from .scorers import ScorerError, check_finite

REQUIRED_FIELDS = ("id", "src", "hyp", "ref")


def _parse_request(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("request must be a JSON object")
    missing = [f for f in REQUIRED_FIELDS if f not in obj]
    if missing:
        raise ValueError(f"request missing field(s): {', '.join(missing)}")
    return obj


def serve(scorer, in_stream, out_stream, batch_size: int = 32) -> int:
    """Score every request on in_stream; return the process exit code.

    Replies are flushed after each batch. A malformed line produces a reply
    with an `error` field (and no score) and makes the final exit nonzero,
    but later requests are still served.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    failed = False
    pending: list[dict] = []

    def flush():
        if not pending:
            return
        triples = [(r["src"], r["hyp"], r["ref"]) for r in pending]
        scores = check_finite(scorer.score_batch(triples))
        for req, score in zip(pending, scores):
            out_stream.write(json.dumps({"id": req["id"], "score": score}) + "\n")
        pending.clear()
        out_stream.flush()

    for lineno, line in enumerate(in_stream, start=1):
        if not line.strip():
            continue
        try:
            pending.append(_parse_request(line))
        except ValueError as exc:
            failed = True
            out_stream.write(json.dumps({"error": f"line {lineno}: {exc}"}) + "\n")
            out_stream.flush()
            continue
        if len(pending) >= batch_size:
            flush()
    try:
        flush()
    except ScorerError as exc:
        out_stream.write(json.dumps({"error": str(exc)}) + "\n")
        out_stream.flush()
        return 1
    return 1 if failed else 0
