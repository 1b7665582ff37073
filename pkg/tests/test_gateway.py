import json
import threading

import httpx
import pytest

from reflexion.gateway import (
    CompletionRequest,
    CompletionResponse,
    HTTPProvider,
    Message,
    MockProvider,
    NoMatchingScriptError,
    RecordingProvider,
    ReplayMissError,
    ReplayProvider,
    TransportFailureError,
    BadStatusError,
    MalformedResponseError,
    load_cassette,
    request_digest,
    request_from_dict,
    request_to_dict,
)


def req(content, temperature=0.0):
    return CompletionRequest(messages=(Message("user", content),), temperature=temperature)


class TestRequestValidation:
    def test_needs_messages(self):
        with pytest.raises(ValueError):
            CompletionRequest(messages=())

    def test_temperature_range(self):
        with pytest.raises(ValueError):
            req("x", temperature=2.5)

    def test_bad_role(self):
        with pytest.raises(ValueError):
            Message("tool", "x")


class TestMockProvider:
    def test_first_matching_rule_wins(self):
        mock = MockProvider.from_pairs(
            [("minSubArraySum", "min_sum = float('inf')"), (r"(?s).", "fallback")]
        )
        out = mock.complete(req("please implement minSubArraySum"))
        assert out.content == "min_sum = float('inf')"

    def test_no_match_raises(self):
        mock = MockProvider.from_pairs([("nope", "x")])
        with pytest.raises(NoMatchingScriptError):
            mock.complete(req("other"))

    def test_sequences_advance_and_stick(self):
        mock = MockProvider.from_pairs([(r"(?s).", ["one", "two"])])
        outs = [mock.complete(req("a")).content for _ in range(3)]
        assert outs == ["one", "two", "two"]

    def test_call_log_records_requests(self):
        mock = MockProvider.from_pairs([(r"(?s).", "x")])
        mock.complete(req("hello"))
        assert mock.prompts_seen() == ["hello"]

    def test_thread_call_counts_are_isolated(self):
        mock = MockProvider.from_pairs([(r"(?s).", "x")])

        def worker():
            for _ in range(5):
                mock.complete(req("w"))
            counts.append(mock.thread_calls)

        counts = []
        threads = [threading.Thread(target=worker) for _ in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert counts == [5, 5, 5]
        assert mock.total_calls == 15


class TestDigest:
    def test_key_order_invariance(self):
        base = req("hello", temperature=0.7)
        data = request_to_dict(base)
        reordered = json.loads(json.dumps(data, sort_keys=True))
        reordered = dict(reversed(list(reordered.items())))
        assert request_digest(request_from_dict(reordered)) == request_digest(base)

    def test_distinct_requests_differ(self):
        assert request_digest(req("a")) != request_digest(req("b"))


class TestCassette:
    def test_record_then_replay_round_trip(self, tmp_path):
        path = tmp_path / "calls.jsonl"
        inner = MockProvider.from_pairs([(r"(?s).", ["first", "second"])])
        recorder = RecordingProvider(inner, path)
        r1 = recorder.complete(req("one"))
        r2 = recorder.complete(req("two"))
        assert len(load_cassette(path)) == 2

        replay = ReplayProvider(path)
        assert replay.complete(req("one")) == r1
        assert replay.complete(req("two")) == r2
        with pytest.raises(ReplayMissError):
            replay.complete(req("three"))

    def test_empty_cassette(self, tmp_path):
        path = tmp_path / "calls.jsonl"
        RecordingProvider(MockProvider.from_pairs([(r"(?s).", "x")]), path)
        assert load_cassette(path) == []

    def test_identical_requests_replay_in_order(self, tmp_path):
        path = tmp_path / "calls.jsonl"
        recorder = RecordingProvider(
            MockProvider.from_pairs([(r"(?s).", ["a", "b"])]), path
        )
        recorder.complete(req("same"))
        recorder.complete(req("same"))
        replay = ReplayProvider(path)
        assert replay.complete(req("same")).content == "a"
        assert replay.complete(req("same")).content == "b"


def _http_provider(handler, retries=2):
    transport = httpx.MockTransport(handler)
    return HTTPProvider(
        base_url="http://testserver/v1",
        model="test-model",
        api_key="key",
        retries=retries,
        backoff_s=0.0,
        transport=transport,
    )


class TestHTTPProvider:
    def test_parses_first_choice(self):
        def handler(request):
            body = json.loads(request.content)
            assert body["model"] == "test-model"
            return httpx.Response(
                200,
                json={
                    "choices": [{"message": {"content": "hi"}, "finish_reason": "stop"}],
                    "usage": {"prompt_tokens": 3, "completion_tokens": 1},
                },
            )

        provider = _http_provider(handler)
        out = provider.complete(req("hello"))
        assert out == CompletionResponse("hi", "stop", 3, 1)

    def test_temperature_serialized_literally(self):
        seen = {}

        def handler(request):
            seen.update(json.loads(request.content))
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "ok"}}]}
            )

        provider = _http_provider(handler)
        provider.complete(req("x", temperature=0.7))
        assert seen["temperature"] == 0.7

    def test_retries_transient_then_succeeds(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        provider = _http_provider(handler, retries=2)
        assert provider.complete(req("x")).content == "ok"
        assert calls["n"] == 3

    def test_gives_up_after_retries(self):
        provider = _http_provider(lambda request: httpx.Response(500), retries=1)
        with pytest.raises(TransportFailureError):
            provider.complete(req("x"))

    def test_non_transient_status_raises_immediately(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(404)

        provider = _http_provider(handler)
        with pytest.raises(BadStatusError):
            provider.complete(req("x"))
        assert calls["n"] == 1

    def test_malformed_body(self):
        provider = _http_provider(
            lambda request: httpx.Response(200, json={"nope": True})
        )
        with pytest.raises(MalformedResponseError):
            provider.complete(req("x"))
