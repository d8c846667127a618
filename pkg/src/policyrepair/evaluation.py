"""Exact request evaluation: allow / explicit deny / implicit deny.

Every request starts implicitly denied. It is allowed iff at least one Allow
statement matches and no Deny statement matches; a matching Deny statement
always wins. Matching is anchored wildcard matching ('*' any substring, '?'
any single character), case-insensitive for actions and case-sensitive for
resources and principals.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from .errors import EmptySpecError, MalformedJsonError
from .policy import Effect, Policy, Statement, policy_fingerprint

Context = tuple[tuple[str, str], ...]


class Verdict(str, Enum):
    ALLOW = "Allow"
    EXPLICIT_DENY = "ExplicitDeny"
    IMPLICIT_DENY = "ImplicitDeny"

    @property
    def is_deny(self) -> bool:
        return self is not Verdict.ALLOW


class Status(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"


def normalize_context(pairs: Iterable[tuple[str, str]] | Mapping[str, str] | None) -> Context | None:
    """Key-sorted tuple form; later duplicates of a key win."""
    if pairs is None:
        return None
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    merged: dict[str, str] = {}
    for key, value in items:
        merged[str(key)] = str(value)
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class AccessRequest:
    """A concrete request tuple plus the verdict it must receive."""

    action: str
    resource: str
    expected: Effect
    principal: str | None = None
    context: Context | None = None

    def key(self) -> tuple:
        """Identity of the request, ignoring the expected label."""
        return (self.principal, self.action, self.resource, self.context)


@dataclass(frozen=True)
class RequestSpec:
    must_allow: tuple[AccessRequest, ...]
    must_deny: tuple[AccessRequest, ...]

    def all_requests(self) -> tuple[AccessRequest, ...]:
        return self.must_allow + self.must_deny

    def __len__(self) -> int:
        return len(self.must_allow) + len(self.must_deny)


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    matched_allow: tuple[int, ...]
    matched_deny: tuple[int, ...]


@dataclass(frozen=True)
class ValidationResult:
    status: Status
    per_request: tuple[tuple[AccessRequest, Decision], ...]
    correct_count: int
    total_count: int
    accuracy_percent: float
    policy_fingerprint: str


def match_pattern(pattern: str, value: str, case_insensitive: bool = False) -> bool:
    """Anchored wildcard match: '*' any (possibly empty) substring, '?' one char.

    Implemented as two-pointer scanning with backtracking on the most recent
    '*', so test oracles built on regex expansion stay independent of it.
    """
    if case_insensitive:
        pattern = pattern.lower()
        value = value.lower()
    px = sx = 0
    star_px = -1
    star_sx = 0
    plen = len(pattern)
    vlen = len(value)
    while sx < vlen:
        if px < plen and (pattern[px] == "?" or pattern[px] == value[sx]):
            px += 1
            sx += 1
        elif px < plen and pattern[px] == "*":
            star_px = px
            star_sx = sx
            px += 1
        elif star_px >= 0:
            px = star_px + 1
            star_sx += 1
            sx = star_sx
        else:
            return False
    while px < plen and pattern[px] == "*":
        px += 1
    return px == plen


def _clause_satisfied(operator: str, values: Sequence[str], actual: str) -> bool:
    if operator == "StringEquals":
        return any(actual == v for v in values)
    # StringLike: wildcard patterns over the context value.
    return any(match_pattern(v, actual) for v in values)


def statement_matches(stmt: Statement, req: AccessRequest) -> bool:
    """True iff the statement's principal, action, resource, and every
    condition clause match the request. A clause over a key missing from the
    request context is unsatisfied, not an error."""
    if stmt.principal is not None:
        principal = req.principal if req.principal is not None else ""
        if not any(match_pattern(p, principal) for p in stmt.principal):
            return False
    if not any(match_pattern(p, req.action, case_insensitive=True) for p in stmt.action):
        return False
    if not any(match_pattern(p, req.resource) for p in stmt.resource):
        return False
    if stmt.condition:
        context = dict(req.context) if req.context else {}
        for clause in stmt.condition:
            actual = context.get(clause.key)
            if actual is None or not _clause_satisfied(clause.operator, clause.values, actual):
                return False
    return True


def evaluate(policy: Policy, req: AccessRequest) -> Decision:
    """Deny-overrides-allow with default implicit deny; records the indices of
    every matching statement of either effect."""
    matched_allow: list[int] = []
    matched_deny: list[int] = []
    for i, stmt in enumerate(policy.statements):
        if statement_matches(stmt, req):
            (matched_allow if stmt.effect is Effect.ALLOW else matched_deny).append(i)
    if matched_deny:
        verdict = Verdict.EXPLICIT_DENY
    elif matched_allow:
        verdict = Verdict.ALLOW
    else:
        verdict = Verdict.IMPLICIT_DENY
    return Decision(verdict, tuple(matched_allow), tuple(matched_deny))


def request_correct(req: AccessRequest, decision: Decision) -> bool:
    if req.expected is Effect.ALLOW:
        return decision.verdict is Verdict.ALLOW
    return decision.verdict.is_deny


def validate_goal(policy: Policy, spec: RequestSpec) -> ValidationResult:
    """Classify every request (must-allow first), never short-circuiting, and
    compute accuracy as the percentage classified correctly."""
    requests = spec.all_requests()
    if not requests:
        raise EmptySpecError("request specification is empty")
    per_request = tuple((req, evaluate(policy, req)) for req in requests)
    correct = sum(1 for req, decision in per_request if request_correct(req, decision))
    total = len(per_request)
    return ValidationResult(
        status=Status.PASS if correct == total else Status.FAIL,
        per_request=per_request,
        correct_count=correct,
        total_count=total,
        accuracy_percent=100.0 * correct / total,
        policy_fingerprint=policy_fingerprint(policy),
    )


# -- JSON wire format --------------------------------------------------------

def request_to_object(req: AccessRequest, include_expected: bool = False) -> dict[str, Any]:
    obj: dict[str, Any] = {}
    if req.principal is not None:
        obj["principal"] = req.principal
    obj["action"] = req.action
    obj["resource"] = req.resource
    if req.context is not None:
        obj["context"] = dict(req.context)
    if include_expected:
        obj["expected"] = req.expected.value
    return obj


def request_from_object(obj: Mapping[str, Any], expected: Effect) -> AccessRequest:
    if "action" not in obj or "resource" not in obj:
        raise MalformedJsonError("request needs 'action' and 'resource'")
    context = obj.get("context")
    if context is not None and not isinstance(context, Mapping):
        raise MalformedJsonError("request 'context' must be an object")
    principal = obj.get("principal")
    if principal is not None and not isinstance(principal, str):
        raise MalformedJsonError("request 'principal' must be a string")
    return AccessRequest(
        action=str(obj["action"]),
        resource=str(obj["resource"]),
        expected=expected,
        principal=principal,
        context=normalize_context(context),
    )


def validation_to_object(result: ValidationResult) -> dict[str, Any]:
    return {
        "status": result.status.value,
        "per_request": [
            {
                "request": request_to_object(req, include_expected=True),
                "decision": {
                    "verdict": decision.verdict.value,
                    "matched_allow": list(decision.matched_allow),
                    "matched_deny": list(decision.matched_deny),
                },
                "correct": request_correct(req, decision),
            }
            for req, decision in result.per_request
        ],
        "correct_count": result.correct_count,
        "total_count": result.total_count,
        "accuracy_percent": result.accuracy_percent,
        "policy_fingerprint": result.policy_fingerprint,
    }


def spec_to_object(spec: RequestSpec) -> dict[str, Any]:
    return {
        "must_allow": [request_to_object(r) for r in spec.must_allow],
        "must_deny": [request_to_object(r) for r in spec.must_deny],
    }


def serialize_spec(spec: RequestSpec) -> str:
    return json.dumps(spec_to_object(spec), indent=2) + "\n"


def spec_from_object(obj: Mapping[str, Any]) -> RequestSpec:
    if not isinstance(obj, Mapping):
        raise MalformedJsonError("request spec must be a JSON object")
    return RequestSpec(
        must_allow=tuple(
            request_from_object(r, Effect.ALLOW) for r in obj.get("must_allow", [])
        ),
        must_deny=tuple(
            request_from_object(r, Effect.DENY) for r in obj.get("must_deny", [])
        ),
    )


def parse_spec(text: str) -> RequestSpec:
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedJsonError(f"invalid JSON: {exc}") from exc
    return spec_from_object(obj)
