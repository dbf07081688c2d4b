import threading

import pytest

from vlteval.judge import (
    DIMENSIONS, BatchStats, JudgeCache, JudgeParseError, JudgeRequest,
    JudgeResponse, ProviderConfig, build_prompt, cache_key, judge_batch,
    low_scoring_dimensions, parse_response,
)


def req(i=0, candidate="hello world"):
    return JudgeRequest(source_text=f"你好{i}", candidate_text=candidate,
                        source_lang="zh", target_lang="en")


def raw_block(sem=4, gram=5, flu=4, cult=3):
    return (
        f"semantic_adequacy: {sem} | meaning kept\n"
        f"grammatical_correctness: {gram} | clean\n"
        f"fluency: {flu} | reads fine\n"
        f"cultural_appropriateness: {cult} | neutral\n"
    )


def provider(**kw):
    defaults = dict(provider_id="test", model="judge-1", offline=False,
                    max_retries=3, backoff=0.0)
    defaults.update(kw)
    return ProviderConfig(**defaults)


class TestBuildPrompt:
    def test_deterministic(self):
        assert build_prompt(req()) == build_prompt(req())

    def test_empty_candidate_still_well_formed(self):
        prompt = build_prompt(req(candidate=""))
        assert "Candidate (en):" in prompt
        for dim in DIMENSIONS:
            assert dim in prompt

    def test_golden_snapshot(self):
        prompt = build_prompt(JudgeRequest("年会入口", "Annual meeting entrance", "zh", "en"))
        assert prompt == (
            "You are a professional evaluator of translations from zh to en.\n"
            "\n"
            "Rate the candidate translation of the source sentence on four dimensions, "
            "assigning an integer score from 1 to 5 for each dimension, with a brief "
            "explanation:\n"
            "- Semantic Adequacy: whether the translation accurately conveys the meaning "
            "of the source sentence.\n"
            "- Grammatical Correctness: whether the translation conforms to the "
            "grammatical rules of the target language.\n"
            "- Fluency: whether the translation reads smoothly and naturally to native "
            "speakers.\n"
            "- Cultural Appropriateness: whether the translation aligns with cultural "
            "norms and avoids misunderstandings or offensive expressions.\n"
            "\n"
            "Source (zh): 年会入口\n"
            "Candidate (en): Annual meeting entrance\n"
            "\n"
            "Answer with exactly one line per dimension, in this format:\n"
            "semantic_adequacy: <score 1-5> | <brief explanation>\n"
            "grammatical_correctness: <score 1-5> | <brief explanation>\n"
            "fluency: <score 1-5> | <brief explanation>\n"
            "cultural_appropriateness: <score 1-5> | <brief explanation>"
        )


class TestParseResponse:
    def test_all_fives(self):
        resp = parse_response(raw_block(5, 5, 5, 5))
        assert resp.overall == 5.0
        assert resp.scores["fluency"] == 5

    def test_overall_is_local_mean(self):
        resp = parse_response(raw_block(5, 4, 4, 5))
        assert resp.overall == pytest.approx(4.5)

    def test_out_of_range_rejected(self):
        with pytest.raises(JudgeParseError, match="outside"):
            parse_response(raw_block(sem=6))

    def test_missing_dimension_rejected(self):
        raw = "\n".join(raw_block().splitlines()[:3])
        with pytest.raises(JudgeParseError, match="cultural_appropriateness"):
            parse_response(raw)

    def test_duplicate_dimension_rejected(self):
        raw = raw_block() + "fluency: 3 | again\n"
        with pytest.raises(JudgeParseError, match="duplicate"):
            parse_response(raw)

    def test_surrounding_prose_tolerated(self):
        raw = "Sure, here is my evaluation:\n" + raw_block() + "\nHope that helps."
        resp = parse_response(raw)
        assert resp.scores["semantic_adequacy"] == 4
        assert resp.rationales["semantic_adequacy"] == "meaning kept"


class TestJudgeBatch:
    def test_cached_requests_make_zero_calls(self, tmp_path):
        cache = JudgeCache(tmp_path / "cache.jsonl")
        prov = provider()
        for i in range(3):
            key = cache_key(prov.provider_id, prov.model, build_prompt(req(i)))
            cache.put(key, build_prompt(req(i)), raw_block())
        stats = BatchStats()
        outcomes = judge_batch([req(i) for i in range(3)], prov, cache,
                               transport=_forbidden, stats=stats)
        assert all(o.response is not None and o.from_cache for o in outcomes)
        assert stats.provider_calls == 0
        assert stats.cache_hits == 3

    def test_replay_fixture_stable(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        prov = provider()
        calls = []

        def transport(prompt):
            calls.append(prompt)
            return raw_block(4, 4, 4, 4)

        requests_ = [req(i) for i in range(10)]
        first = judge_batch(requests_, prov, JudgeCache(path), transport=transport)
        assert len(calls) == 10
        replay = judge_batch(requests_, provider(offline=True), JudgeCache(path))
        assert [o.response for o in replay] == [o.response for o in first]

    def test_offline_cache_miss_names_request(self, tmp_path):
        outcome = judge_batch([req(7)], provider(offline=True),
                              JudgeCache(tmp_path / "c.jsonl"))[0]
        assert outcome.response is None
        assert "你好7" in outcome.error

    def test_fault_injection_partial_failure(self, tmp_path):
        prov = provider()
        lock = threading.Lock()

        def transport(prompt):
            if "你好3" in prompt:
                raise RuntimeError("flaky backend")
            return raw_block()

        outcomes = judge_batch([req(i) for i in range(10)], prov,
                               JudgeCache(tmp_path / "c.jsonl"), transport=transport)
        errors = [o for o in outcomes if o.error]
        assert len(errors) == 1
        assert "exhausted retries" in errors[0].error
        assert sum(o.response is not None for o in outcomes) == 9

    def test_order_independence(self, tmp_path):
        def transport(prompt):
            return raw_block(4, 5, 3, 2) if "你好0" in prompt else raw_block(2, 2, 2, 2)

        prov = provider()
        requests_ = [req(i) for i in range(5)]
        fwd = judge_batch(requests_, prov, JudgeCache(None), transport=transport)
        rev = judge_batch(list(reversed(requests_)), prov, JudgeCache(None),
                          transport=transport)
        by_req_fwd = {o.request: o.response for o in fwd}
        by_req_rev = {o.request: o.response for o in rev}
        assert by_req_fwd == by_req_rev

    def test_retry_then_success(self, tmp_path):
        attempts = {"n": 0}

        def transport(prompt):
            attempts["n"] += 1
            if attempts["n"] < 3:
                raise RuntimeError("transient")
            return raw_block()

        outcome = judge_batch([req()], provider(concurrency=1),
                              JudgeCache(tmp_path / "c.jsonl"), transport=transport)[0]
        assert outcome.response is not None
        assert attempts["n"] == 3


def _forbidden(prompt):
    raise AssertionError("network transport must not be called")


def test_cache_append_only_round_trip(tmp_path):
    path = tmp_path / "cache.jsonl"
    cache = JudgeCache(path)
    cache.put("k1", "p1", raw_block())
    cache.put("k1", "p1", raw_block(1, 1, 1, 1))  # first write wins
    reloaded = JudgeCache(path)
    assert reloaded.get("k1") == raw_block()


def test_low_scoring_dimensions_threshold():
    resp = JudgeResponse.from_scores(
        {"semantic_adequacy": 5, "grammatical_correctness": 4,
         "fluency": 5, "cultural_appropriateness": 3})
    assert low_scoring_dimensions(resp) == ["grammatical_correctness",
                                            "cultural_appropriateness"]
    assert low_scoring_dimensions(resp, threshold=2.0) == []
