"""Scorer implementations behind the adapter.

Each scorer maps a batch of (src, hyp, ref) triples to one finite score per
triple, on the scorer's native scale. The neural scorers wrap third-party
models loaded lazily; a preloaded model object can be injected for tests.
"""

from __future__ import annotations

import math


class ScorerError(Exception):
    pass


class DummyScorer:
    """Constant scorer for protocol and plumbing tests."""

    name = "dummy"

    def __init__(self, checkpoint: str | None = None, constant: float = 50.0):
        self.constant = constant

    def score_batch(self, triples: list[tuple[str, str, str]]) -> list[float]:
        return [self.constant] * len(triples)


class BertScoreScorer:
    """BERTScore F1 on the 0-1 scale."""

    name = "bertscore"

    def __init__(self, checkpoint: str | None = None, model=None):
        if model is not None:
            self._model = model
        else:
            try:
                from bert_score import BERTScorer
            except ImportError as exc:
                raise ScorerError(
                    "bert-score is not installed; install the [bertscore] extra"
                ) from exc
            kwargs = {"model_type": checkpoint} if checkpoint else {"lang": "en"}
            self._model = _BertScoreModel(BERTScorer(**kwargs))

    def score_batch(self, triples: list[tuple[str, str, str]]) -> list[float]:
        return self._model.score([(hyp, ref) for _, hyp, ref in triples])


class _BertScoreModel:
    def __init__(self, scorer):
        self._scorer = scorer

    def score(self, pairs):
        hyps, refs = [list(x) for x in zip(*pairs)]
        _, _, f1 = self._scorer.score(hyps, refs)
        return [float(v) for v in f1]


class CometScorer:
    """COMET quality estimate on the model's native 0-1 scale."""

    name = "comet"
    DEFAULT_CHECKPOINT = "Unbabel/wmt22-comet-da"

    def __init__(self, checkpoint: str | None = None, model=None):
        if model is not None:
            self._model = model
        else:
            try:
                from comet import download_model, load_from_checkpoint
            except ImportError as exc:
                raise ScorerError(
                    "unbabel-comet is not installed; install the [comet] extra"
                ) from exc
            path = download_model(checkpoint or self.DEFAULT_CHECKPOINT)
            self._model = _CometModel(load_from_checkpoint(path))

    def score_batch(self, triples: list[tuple[str, str, str]]) -> list[float]:
        return self._model.score(triples)


class _CometModel:
    def __init__(self, model):
        self._model = model

    def score(self, triples):
        data = [{"src": s, "mt": h, "ref": r} for s, h, r in triples]
        out = self._model.predict(data, progress_bar=False)
        return [float(v) for v in out.scores]


SCORERS = {
    "dummy": DummyScorer,
    "bertscore": BertScoreScorer,
    "comet": CometScorer,
}


def make_scorer(name: str, checkpoint: str | None = None):
    if name not in SCORERS:
        raise ScorerError(f"unknown scorer {name!r}; choose from {sorted(SCORERS)}")
    return SCORERS[name](checkpoint=checkpoint)


def check_finite(scores: list[float]) -> list[float]:
    for s in scores:
        if not math.isfinite(s):
            raise ScorerError(f"scorer produced a non-finite score: {s!r}")
    return scores
