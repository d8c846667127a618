"""Candidate-policy synthesizers: a remote chat-completion backend and a
deterministic rule-based oracle, plus robust policy extraction from free-form
model output.

The rule-based oracle exists so the whole repair loop is testable offline: it
patches each localized fault with an exact-tuple statement (or element
removal) and never generalizes; generalization quality is what a language
model backend is for.
"""
from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Protocol

import httpx

from .errors import (
    AllCandidatesMalformedError,
    AuthMissingError,
    ContradictorySpecError,
    ExtractionFailedError,
    FingerprintMismatchError,
    NoPolicyFoundError,
    NothingRepairableError,
    PolicyParseError,
    SynthesisError,
    SynthesisTimeoutError,
    TransportFailureError,
    UnsupportedConstructError,
)
from .evaluation import AccessRequest, RequestSpec, ValidationResult
from .localization import FaultCase, FaultReport, localize
from .policy import (
    ConditionClause,
    Effect,
    Policy,
    Statement,
    normalize_policy,
    policy_fingerprint,
    serialize_policy,
)
from .prompts import system_instruction

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)


class Backend(str, Enum):
    REMOTE = "remote"
    RULE_BASED = "rule-based"


@dataclass(frozen=True)
class SynthesizerConfig:
    backend: Backend = Backend.RULE_BASED
    endpoint: str | None = None
    model_name: str | None = None
    temperature: float = 0.2
    max_output_tokens: int = 2048
    request_timeout: float = 60.0
    retry_limit: int = 3
    api_key_env: str = "POLICYREPAIR_API_KEY"

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.retry_limit < 1:
            raise ValueError("retry_limit must be >= 1")
        if self.backend is Backend.REMOTE and (not self.endpoint or not self.model_name):
            raise ValueError("remote backend needs endpoint and model_name")


@dataclass(frozen=True)
class SynthesisResult:
    candidate: Policy
    raw_output: str
    latency_seconds: float
    backend_used: Backend
    attempts: int = 1


def _balanced_objects(text: str) -> list[str]:
    """Every balanced top-level {...} region, string-aware, left to right."""
    regions: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i] != "{":
            i += 1
            continue
        depth = 0
        in_string = False
        j = i
        end = -1
        while j < n:
            ch = text[j]
            if in_string:
                if ch == "\\":
                    j += 1
                elif ch == '"':
                    in_string = False
            elif ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    end = j
                    break
            j += 1
        if end == -1:
            i += 1
            continue
        regions.append(text[i : end + 1])
        i = end + 1
    return regions


def extract_policy_from_response(raw: str) -> Policy:
    """Pull the first normalizable policy out of free-form model output.

    Fenced code blocks are tried first, then any balanced top-level JSON
    object containing a "Statement" key.
    """
    candidates: list[str] = []
    for match in _FENCE_RE.finditer(raw):
        block = match.group(1).strip()
        if '"Statement"' in block or "'Statement'" in block:
            candidates.append(block)
    for region in _balanced_objects(raw):
        if '"Statement"' in region:
            candidates.append(region)
    if not candidates:
        raise NoPolicyFoundError("response contains no policy object")
    last: Exception | None = None
    for candidate in candidates:
        try:
            return normalize_policy(candidate)
        except (PolicyParseError, UnsupportedConstructError) as exc:
            last = exc
    raise AllCandidatesMalformedError(f"no candidate normalized: {last}")


def _split_prompt(prompt: str) -> tuple[str, str]:
    """(system, user) message pair; the system instruction is peeled off the
    prompt when present so it is not sent twice."""
    instruction = system_instruction()
    if prompt.startswith(instruction):
        return instruction, prompt[len(instruction):].lstrip("\n")
    return instruction, prompt


def synthesize_remote(
    prompt: str,
    cfg: SynthesizerConfig,
    client: httpx.Client | None = None,
) -> SynthesisResult:
    """POST the prompt to a chat-completion-compatible endpoint, retrying on
    transport or extraction failure up to cfg.retry_limit total attempts."""
    if cfg.backend is not Backend.REMOTE:
        raise ValueError("synthesize_remote needs a remote backend config")
    api_key = os.environ.get(cfg.api_key_env)
    if not api_key:
        raise AuthMissingError(f"environment variable {cfg.api_key_env} is not set")
    system, user = _split_prompt(prompt)
    payload = {
        "model": cfg.model_name,
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_output_tokens,
    }
    headers = {"Authorization": f"Bearer {api_key}"}
    owned = client is None
    if owned:
        client = httpx.Client(timeout=cfg.request_timeout)
    started = time.perf_counter()
    last_error: SynthesisError | None = None
    try:
        for attempt in range(1, cfg.retry_limit + 1):
            try:
                response = client.post(cfg.endpoint, json=payload, headers=headers)
                if response.status_code != 200:
                    raise TransportFailureError(
                        f"endpoint answered HTTP {response.status_code}"
                    )
                body = response.json()
                content = body["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                last_error = SynthesisTimeoutError(str(exc))
                continue
            except httpx.HTTPError as exc:
                last_error = TransportFailureError(str(exc))
                continue
            except TransportFailureError as exc:
                last_error = exc
                continue
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                last_error = TransportFailureError(f"malformed response body: {exc}")
                continue
            try:
                candidate = extract_policy_from_response(content)
            except SynthesisError as exc:
                last_error = ExtractionFailedError(str(exc))
                continue
            return SynthesisResult(
                candidate=candidate,
                raw_output=content,
                latency_seconds=time.perf_counter() - started,
                backend_used=Backend.REMOTE,
                attempts=attempt,
            )
    finally:
        if owned:
            client.close()
    raise last_error if last_error is not None else ExtractionFailedError("no attempts ran")


def _is_concrete(pattern: str) -> bool:
    return "*" not in pattern and "?" not in pattern


def _patch_statement(effect: Effect, req: AccessRequest) -> Statement:
    condition = None
    if req.context:
        condition = tuple(
            ConditionClause("StringEquals", key, (value,)) for key, value in req.context
        )
    return Statement(
        effect=effect,
        action=(req.action,),
        resource=(req.resource,),
        principal=(req.principal,) if req.principal is not None else None,
        condition=condition,
    )


def synthesize_rule_based(
    policy: Policy, report: FaultReport, spec: RequestSpec
) -> SynthesisResult:
    """Deterministic repair: exact-tuple Allow patches for missing allows,
    exact-tuple Deny patches for wrong explicit allows, and wildcard-free
    element removal for wrong explicit denies. Entries whose explicit deny
    matches only through a wildcard are beyond this backend."""
    started = time.perf_counter()
    if report.policy_fingerprint != policy_fingerprint(policy):
        raise FingerprintMismatchError("fault report came from a different policy")
    if not report.entries:
        raise NothingRepairableError("fault report is empty")
    allow_keys = {r.key() for r in spec.must_allow}
    deny_keys = {r.key() for r in spec.must_deny}
    overlap = allow_keys & deny_keys
    if overlap:
        raise ContradictorySpecError(f"{len(overlap)} request tuple(s) in both lists")

    appended: list[Statement] = []
    seen_patches: set[tuple] = set()
    remove_actions: dict[int, set[str]] = {}
    remove_resources: dict[int, set[str]] = {}
    changed = False

    def append_patch(effect: Effect, req: AccessRequest) -> None:
        nonlocal changed
        patch_key = (effect, req.key())
        if patch_key in seen_patches:
            return
        seen_patches.add(patch_key)
        appended.append(_patch_statement(effect, req))
        changed = True

    for entry in report.entries:
        if entry.case is FaultCase.MISSING_ALLOW:
            append_patch(Effect.ALLOW, entry.request)
    for entry in report.entries:
        if entry.case is FaultCase.WRONG_EXPLICIT_ALLOW:
            append_patch(Effect.DENY, entry.request)
    for entry in report.entries:
        if entry.case is not FaultCase.WRONG_EXPLICIT_DENY:
            continue
        for index in entry.responsible:
            stmt = policy.statements[index]
            action_hit = next(
                (a for a in stmt.action
                 if _is_concrete(a) and a.lower() == entry.request.action.lower()),
                None,
            )
            if action_hit is not None:
                remove_actions.setdefault(index, set()).add(action_hit)
                changed = True
                continue
            resource_hit = next(
                (r for r in stmt.resource
                 if _is_concrete(r) and r == entry.request.resource),
                None,
            )
            if resource_hit is not None:
                remove_resources.setdefault(index, set()).add(resource_hit)
                changed = True
            # else: wildcard-matched explicit deny, unrepairable by rules.

    if not changed:
        raise NothingRepairableError("no fault entry is repairable by rules")

    statements: list[Statement] = []
    for i, stmt in enumerate(policy.statements):
        action = tuple(a for a in stmt.action if a not in remove_actions.get(i, set()))
        resource = tuple(r for r in stmt.resource if r not in remove_resources.get(i, set()))
        if not action or not resource:
            continue
        if action == stmt.action and resource == stmt.resource:
            statements.append(stmt)
        else:
            statements.append(
                Statement(
                    effect=stmt.effect,
                    action=action,
                    resource=resource,
                    sid=stmt.sid,
                    principal=stmt.principal,
                    condition=stmt.condition,
                )
            )
    if not statements and not appended:
        raise NothingRepairableError("element removal would leave an empty policy")
    candidate = Policy(statements=tuple(statements) + tuple(appended), version=policy.version)
    return SynthesisResult(
        candidate=candidate,
        raw_output=serialize_policy(candidate),
        latency_seconds=time.perf_counter() - started,
        backend_used=Backend.RULE_BASED,
    )


class Synthesizer(Protocol):
    """Backend protocol the repair loop drives."""

    def synthesize(
        self,
        prompt: str,
        *,
        policy: Policy,
        spec: RequestSpec,
        validation: ValidationResult,
    ) -> SynthesisResult:
        ...


@dataclass
class RemoteSynthesizer:
    cfg: SynthesizerConfig
    client: httpx.Client | None = None

    def synthesize(self, prompt: str, **_: Any) -> SynthesisResult:
        return synthesize_remote(prompt, self.cfg, client=self.client)


class RuleBasedSynthesizer:
    """Prompt-agnostic oracle: recomputes localization from the current policy
    and validation result, so it serves both prompt modes."""

    def synthesize(
        self,
        prompt: str,
        *,
        policy: Policy,
        spec: RequestSpec,
        validation: ValidationResult,
    ) -> SynthesisResult:
        report = localize(policy, validation)
        return synthesize_rule_based(policy, report, spec)


def make_synthesizer(cfg: SynthesizerConfig) -> Synthesizer:
    if cfg.backend is Backend.REMOTE:
        return RemoteSynthesizer(cfg)
    return RuleBasedSynthesizer()
