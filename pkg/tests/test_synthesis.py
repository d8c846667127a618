from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import httpx
import pytest

from policyrepair import (
    AccessRequest,
    Backend,
    Effect,
    SynthesizerConfig,
    Verdict,
    evaluate,
    extract_policy_from_response,
    localize,
    parse_policy,
    serialize_policy,
    synthesize_remote,
    synthesize_rule_based,
    validate_goal,
)
from policyrepair.errors import (
    AllCandidatesMalformedError,
    AuthMissingError,
    ContradictorySpecError,
    ExtractionFailedError,
    NoPolicyFoundError,
    NothingRepairableError,
    TransportFailureError,
)
from policyrepair.evaluation import RequestSpec
from policyrepair.localization import FaultCase

VALID_POLICY = '{"Statement":[{"Effect":"Allow","Action":"s3:GetObject","Resource":"*"}]}'


class TestExtraction:
    def test_fenced_block(self):
        raw = f"Sure, here is the repaired policy:\n```json\n{VALID_POLICY}\n```\n"
        assert extract_policy_from_response(raw) == parse_policy(VALID_POLICY)

    def test_second_object_when_first_lacks_statement(self):
        raw = f'Notes first. {{"metadata": {{"x": 1}}}} and then {VALID_POLICY} trailing prose.'
        assert extract_policy_from_response(raw) == parse_policy(VALID_POLICY)

    def test_pure_prose(self):
        with pytest.raises(NoPolicyFoundError):
            extract_policy_from_response("I cannot repair this policy, sorry.")

    def test_all_candidates_malformed(self):
        raw = '{"Statement": [{"Effect": "Whatever", "Action": "a", "Resource": "r"}]}'
        with pytest.raises(AllCandidatesMalformedError):
            extract_policy_from_response(raw)

    def test_nested_statement_object_recovered(self):
        raw = 'prefix {"note": 1} {"Version": "2012-10-17", "Statement": {"Effect": "allow", "Action": "a:b", "Resource": "r",}} suffix'
        policy = extract_policy_from_response(raw)
        assert policy.statements[0].action == ("a:b",)


def _remote_cfg(**kw) -> SynthesizerConfig:
    defaults = dict(
        backend=Backend.REMOTE,
        endpoint="http://llm.test/v1/chat/completions",
        model_name="repair-model",
        retry_limit=3,
    )
    defaults.update(kw)
    return SynthesizerConfig(**defaults)


def _chat_response(content: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}


@pytest.fixture(autouse=True)
def _api_key(monkeypatch):
    monkeypatch.setenv("POLICYREPAIR_API_KEY", "test-key")


class TestRemote:
    def test_echo_policy_stub(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["payload"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json=_chat_response(f"```json\n{VALID_POLICY}\n```"))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        result = synthesize_remote("fix it please", _remote_cfg(), client=client)
        assert result.candidate == parse_policy(VALID_POLICY)
        assert result.attempts == 1
        assert result.backend_used is Backend.REMOTE
        assert seen["auth"] == "Bearer test-key"
        assert seen["payload"]["model"] == "repair-model"
        roles = [m["role"] for m in seen["payload"]["messages"]]
        assert roles == ["system", "user"]

    def test_retry_then_succeed(self):
        calls = {"count": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["count"] += 1
            if calls["count"] <= 2:
                return httpx.Response(500, text="overloaded")
            return httpx.Response(200, json=_chat_response(VALID_POLICY))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        result = synthesize_remote("fix", _remote_cfg(retry_limit=3), client=client)
        assert result.attempts == 3
        assert calls["count"] == 3

    def test_extraction_failure_exhausts_retries(self):
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json=_chat_response("no policy here, just prose"))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(ExtractionFailedError):
            synthesize_remote("fix", _remote_cfg(retry_limit=1), client=client)

    def test_persistent_transport_failure(self):
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(503, text="down")

        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(TransportFailureError):
            synthesize_remote("fix", _remote_cfg(retry_limit=2), client=client)

    def test_auth_missing(self, monkeypatch):
        monkeypatch.delenv("POLICYREPAIR_API_KEY", raising=False)
        with pytest.raises(AuthMissingError):
            synthesize_remote("fix", _remote_cfg())

    def test_system_instruction_split(self):
        from policyrepair.prompts import system_instruction

        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            captured["payload"] = json.loads(request.content)
            return httpx.Response(200, json=_chat_response(VALID_POLICY))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        prompt = system_instruction() + "\n\nPOLICY:\n{}"
        synthesize_remote(prompt, _remote_cfg(), client=client)
        messages = captured["payload"]["messages"]
        assert messages[0]["content"] == system_instruction()
        assert messages[1]["content"] == "POLICY:\n{}"

    def test_against_live_http_server(self):
        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers["Content-Length"])
                json.loads(self.rfile.read(length))  # body must be valid JSON
                body = json.dumps(_chat_response(VALID_POLICY)).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            cfg = _remote_cfg(endpoint=f"http://127.0.0.1:{server.server_port}/v1/chat/completions")
            result = synthesize_remote("fix", cfg)
            assert result.candidate == parse_policy(VALID_POLICY)
        finally:
            server.shutdown()
            thread.join(timeout=5)


def _report_for(policy, spec):
    return localize(policy, validate_goal(policy, spec))


class TestRuleBased:
    def test_missing_allow_patched(self, figure_policy, figure_spec):
        report = _report_for(figure_policy, figure_spec)
        result = synthesize_rule_based(figure_policy, report, figure_spec)
        target = figure_spec.must_allow[0]  # sqs:SendMessage on the workgroup
        assert evaluate(result.candidate, target).verdict is Verdict.ALLOW

    def test_wrong_explicit_allow_patched(self):
        policy = parse_policy('{"Statement":[{"Effect":"Allow","Action":"s3:*","Resource":"*"}]}')
        bad = AccessRequest(
            action="s3:GetObject",
            resource="arn:aws:s3:::admin-category/document.txt",
            expected=Effect.DENY,
        )
        spec = RequestSpec(must_allow=(), must_deny=(bad,))
        result = synthesize_rule_based(policy, _report_for(policy, spec), spec)
        assert evaluate(result.candidate, bad).verdict is Verdict.EXPLICIT_DENY

    def test_wrong_explicit_deny_element_removed(self):
        policy = parse_policy(
            json.dumps(
                {
                    "Statement": [
                        {"Effect": "Allow", "Action": "ec2:*", "Resource": "*"},
                        {
                            "Effect": "Deny",
                            "Action": ["ec2:DescribeInstances", "ec2:StopInstances"],
                            "Resource": "*",
                        },
                    ]
                }
            )
        )
        want = AccessRequest(action="ec2:DescribeInstances", resource="r", expected=Effect.ALLOW)
        spec = RequestSpec(must_allow=(want,), must_deny=())
        result = synthesize_rule_based(policy, _report_for(policy, spec), spec)
        assert evaluate(result.candidate, want).verdict is Verdict.ALLOW
        # the other deny element survives
        other = AccessRequest(action="ec2:StopInstances", resource="r", expected=Effect.DENY)
        assert evaluate(result.candidate, other).verdict is Verdict.EXPLICIT_DENY

    def test_statement_dropped_when_lists_empty(self):
        policy = parse_policy(
            json.dumps(
                {
                    "Statement": [
                        {"Effect": "Allow", "Action": "a:*", "Resource": "*"},
                        {"Effect": "Deny", "Action": "a:x", "Resource": "*"},
                    ]
                }
            )
        )
        want = AccessRequest(action="a:x", resource="r", expected=Effect.ALLOW)
        spec = RequestSpec(must_allow=(want,), must_deny=())
        result = synthesize_rule_based(policy, _report_for(policy, spec), spec)
        assert len(result.candidate.statements) == 1
        assert evaluate(result.candidate, want).verdict is Verdict.ALLOW

    def test_wildcard_deny_unrepairable(self):
        policy = parse_policy(
            json.dumps(
                {
                    "Statement": [
                        {"Effect": "Allow", "Action": "a:*", "Resource": "*"},
                        {"Effect": "Deny", "Action": "a:x*", "Resource": "*"},
                    ]
                }
            )
        )
        want = AccessRequest(action="a:xy", resource="r", expected=Effect.ALLOW)
        spec = RequestSpec(must_allow=(want,), must_deny=())
        with pytest.raises(NothingRepairableError):
            synthesize_rule_based(policy, _report_for(policy, spec), spec)

    def test_contradictory_spec(self):
        policy = parse_policy('{"Statement":[{"Effect":"Allow","Action":"a:*","Resource":"*"}]}')
        same = dict(action="a:x", resource="r")
        spec = RequestSpec(
            must_allow=(AccessRequest(expected=Effect.ALLOW, **same),),
            must_deny=(AccessRequest(expected=Effect.DENY, **same),),
        )
        report = _report_for(policy, spec)
        with pytest.raises(ContradictorySpecError):
            synthesize_rule_based(policy, report, spec)

    def test_deterministic(self, figure_policy, figure_spec):
        report = _report_for(figure_policy, figure_spec)
        a = synthesize_rule_based(figure_policy, report, figure_spec)
        b = synthesize_rule_based(figure_policy, report, figure_spec)
        assert serialize_policy(a.candidate) == serialize_policy(b.candidate)

    def test_patch_preserves_correct_requests(self, figure_policy, figure_spec):
        report = _report_for(figure_policy, figure_spec)
        result = synthesize_rule_based(figure_policy, report, figure_spec)
        before = validate_goal(figure_policy, figure_spec)
        after = validate_goal(result.candidate, figure_spec)
        correct_before = {
            req.key() for req, d in before.per_request
            if (d.verdict is Verdict.ALLOW) == (req.expected is Effect.ALLOW)
        }
        still_correct = {
            req.key() for req, d in after.per_request
            if (d.verdict is Verdict.ALLOW) == (req.expected is Effect.ALLOW)
        }
        assert correct_before <= still_correct
