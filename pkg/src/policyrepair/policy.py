"""IAM-style policy model: parsing, normalization, serialization, corpus stats.

A policy is a list of statements; a statement is (Effect, Principal, Action,
Resource, Condition). Action and Resource hold wildcard patterns ('*' matches
any substring, '?' any single character). Principal and Condition are optional.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence

from .errors import (
    EmptyActionOrResourceError,
    EmptyCorpusError,
    EmptyPolicyError,
    InvalidEffectError,
    MalformedJsonError,
    MissingEffectError,
    UnrepairableError,
    UnsupportedConditionOperatorError,
    UnsupportedConstructError,
)

SUPPORTED_CONDITION_OPERATORS = ("StringEquals", "StringLike")

# Constructs outside the 5-tuple statement model are rejected at parse time.
_REJECTED_STATEMENT_KEYS = ("NotAction", "NotResource", "NotPrincipal")


class Effect(str, Enum):
    ALLOW = "Allow"
    DENY = "Deny"


@dataclass(frozen=True)
class ConditionClause:
    """One condition: operator applied to a context key against value patterns."""

    operator: str
    key: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.operator not in SUPPORTED_CONDITION_OPERATORS:
            raise UnsupportedConditionOperatorError(
                f"unsupported condition operator {self.operator!r}"
            )
        if not self.values:
            raise MalformedJsonError(f"condition {self.key!r} has no values")


@dataclass(frozen=True)
class Statement:
    """One access rule. Action and resource lists are non-empty pattern lists."""

    effect: Effect
    action: tuple[str, ...]
    resource: tuple[str, ...]
    sid: str | None = None
    principal: tuple[str, ...] | None = None
    condition: tuple[ConditionClause, ...] | None = None

    def __post_init__(self) -> None:
        if not self.action or not self.resource:
            raise EmptyActionOrResourceError("statement needs non-empty Action and Resource")


@dataclass(frozen=True)
class Policy:
    statements: tuple[Statement, ...]
    version: str | None = None

    def __post_init__(self) -> None:
        if not self.statements:
            raise EmptyPolicyError("policy has no statements")


@dataclass(frozen=True)
class CorpusStats:
    total_policies: int
    total_statements: int
    avg_statements_per_policy: float
    min_statements_per_policy: int
    max_statements_per_policy: int
    unique_services: int
    unique_actions: int
    unique_resource_types: int
    allow_count: int
    deny_count: int


def _as_string_list(value: Any, what: str) -> tuple[str, ...]:
    """Promote a scalar to a one-element list and validate element types."""
    if isinstance(value, str):
        return (value,)
    if isinstance(value, list):
        out = []
        for item in value:
            if not isinstance(item, str):
                raise MalformedJsonError(f"{what} entries must be strings, got {item!r}")
            out.append(item)
        return tuple(out)
    raise MalformedJsonError(f"{what} must be a string or list of strings, got {type(value).__name__}")


def _parse_principal(value: Any) -> tuple[str, ...]:
    # Accepts "p", ["p", ...], or the AWS map form {"AWS": "p"} flattened to
    # its values.
    if isinstance(value, dict):
        flattened: list[str] = []
        for sub in value.values():
            flattened.extend(_as_string_list(sub, "Principal"))
        if not flattened:
            raise MalformedJsonError("Principal map has no entries")
        return tuple(flattened)
    return _as_string_list(value, "Principal")


def _parse_condition(value: Any) -> tuple[ConditionClause, ...]:
    if not isinstance(value, dict):
        raise MalformedJsonError("Condition must be an object")
    clauses: list[ConditionClause] = []
    for operator, mapping in value.items():
        if operator not in SUPPORTED_CONDITION_OPERATORS:
            raise UnsupportedConditionOperatorError(
                f"unsupported condition operator {operator!r}"
            )
        if not isinstance(mapping, dict):
            raise MalformedJsonError(f"Condition {operator} must map keys to values")
        for key, raw in mapping.items():
            clauses.append(ConditionClause(operator, key, _as_string_list(raw, f"Condition {key}")))
    if not clauses:
        raise MalformedJsonError("Condition object has no clauses")
    return tuple(clauses)


def _parse_statement(obj: Any) -> Statement:
    if not isinstance(obj, dict):
        raise MalformedJsonError("statement must be a JSON object")
    for key in _REJECTED_STATEMENT_KEYS:
        if key in obj:
            raise UnsupportedConstructError(f"{key} is outside the supported statement model")
    if "Effect" not in obj:
        raise MissingEffectError("statement lacks Effect")
    raw_effect = obj["Effect"]
    if not isinstance(raw_effect, str) or raw_effect.lower() not in ("allow", "deny"):
        raise InvalidEffectError(f"Effect must be Allow or Deny, got {raw_effect!r}")
    # Forum-sourced JSON is messy: effect casing is canonicalized here.
    effect = Effect.ALLOW if raw_effect.lower() == "allow" else Effect.DENY

    if "Action" not in obj or "Resource" not in obj:
        raise EmptyActionOrResourceError("statement needs Action and Resource")
    action = _as_string_list(obj["Action"], "Action")
    resource = _as_string_list(obj["Resource"], "Resource")
    if not action or not resource:
        raise EmptyActionOrResourceError("Action and Resource must be non-empty")

    sid = obj.get("Sid")
    if sid is not None and not isinstance(sid, str):
        raise MalformedJsonError("Sid must be a string")
    principal = _parse_principal(obj["Principal"]) if "Principal" in obj else None
    condition = _parse_condition(obj["Condition"]) if "Condition" in obj else None
    return Statement(
        effect=effect,
        action=action,
        resource=resource,
        sid=sid,
        principal=principal,
        condition=condition,
    )


def parse_policy(text: str) -> Policy:
    """Parse JSON text into a Policy, promoting scalar fields to lists.

    Raises MalformedJsonError, EmptyPolicyError, MissingEffectError,
    InvalidEffectError, EmptyActionOrResourceError, or
    UnsupportedConditionOperatorError.
    """
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedJsonError(f"invalid JSON: {exc}") from exc
    return policy_from_object(obj)


def policy_from_object(obj: Any) -> Policy:
    """Build a Policy from an already-decoded JSON object."""
    if not isinstance(obj, dict):
        raise MalformedJsonError("policy must be a JSON object")
    raw_statements = obj.get("Statement")
    if raw_statements is None:
        raise EmptyPolicyError("policy has no Statement field")
    if isinstance(raw_statements, dict):
        raw_statements = [raw_statements]
    if not isinstance(raw_statements, list):
        raise MalformedJsonError("Statement must be an object or a list")
    if not raw_statements:
        raise EmptyPolicyError("Statement list is empty")
    version = obj.get("Version")
    if version is not None and not isinstance(version, str):
        raise MalformedJsonError("Version must be a string")
    return Policy(
        statements=tuple(_parse_statement(s) for s in raw_statements),
        version=version,
    )


def _strip_comments(text: str) -> str:
    """Remove // and /* */ comments, preserving string contents."""
    out: list[str] = []
    i = 0
    n = len(text)
    in_string = False
    while i < n:
        ch = text[i]
        if in_string:
            out.append(ch)
            if ch == "\\" and i + 1 < n:
                out.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            out.append(ch)
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            i += 2
            while i + 1 < n and not (text[i] == "*" and text[i + 1] == "/"):
                i += 1
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _strip_trailing_commas(text: str) -> str:
    """Remove commas whose next non-whitespace character closes a container."""
    out: list[str] = []
    i = 0
    n = len(text)
    in_string = False
    while i < n:
        ch = text[i]
        if in_string:
            out.append(ch)
            if ch == "\\" and i + 1 < n:
                out.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            out.append(ch)
            i += 1
            continue
        if ch == ",":
            j = i + 1
            while j < n and text[j] in " \t\r\n":
                j += 1
            if j < n and text[j] in "}]":
                i += 1
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def normalize_policy(text: str) -> Policy:
    """Parse possibly ill-formed JSON text after a fixed syntactic repair pass.

    The repair sequence strips comments and trailing commas; structural fixes
    (scalar promotion, statement-object promotion, effect casing) happen in
    parse_policy. Raises UnrepairableError when the text still is not JSON
    afterwards; semantic parse errors propagate unchanged.
    """
    cleaned = _strip_trailing_commas(_strip_comments(text.strip().lstrip("﻿")))
    try:
        obj = json.loads(cleaned)
    except (json.JSONDecodeError, TypeError) as exc:
        raise UnrepairableError(f"syntactic repairs exhausted: {exc}") from exc
    return policy_from_object(obj)


def _condition_to_json(clauses: Iterable[ConditionClause]) -> dict[str, dict[str, list[str]]]:
    out: dict[str, dict[str, list[str]]] = {}
    for clause in clauses:
        out.setdefault(clause.operator, {})[clause.key] = list(clause.values)
    return out


def statement_to_object(stmt: Statement) -> dict[str, Any]:
    """Canonical JSON object for one statement, keys in fixed order."""
    obj: dict[str, Any] = {}
    if stmt.sid is not None:
        obj["Sid"] = stmt.sid
    obj["Effect"] = stmt.effect.value
    if stmt.principal is not None:
        obj["Principal"] = list(stmt.principal)
    obj["Action"] = list(stmt.action)
    obj["Resource"] = list(stmt.resource)
    if stmt.condition is not None:
        obj["Condition"] = _condition_to_json(stmt.condition)
    return obj


def policy_to_object(policy: Policy) -> dict[str, Any]:
    obj: dict[str, Any] = {}
    if policy.version is not None:
        obj["Version"] = policy.version
    obj["Statement"] = [statement_to_object(s) for s in policy.statements]
    return obj


def serialize_policy(policy: Policy) -> str:
    """Canonical JSON text: fixed key order, 2-space indentation."""
    return json.dumps(policy_to_object(policy), indent=2)


def policy_fingerprint(policy: Policy) -> str:
    """Content digest of the canonical serialization."""
    return hashlib.sha256(serialize_policy(policy).encode("utf-8")).hexdigest()


def action_service(action: str) -> str:
    """Service prefix of an action pattern ('s3:GetObject' -> 's3')."""
    return action.split(":", 1)[0] if ":" in action else action


def resource_type(resource: str) -> str:
    """Coarse resource classification applied uniformly across a corpus.

    For an ARN, the service plus the first segment of the resource portion
    (split on '/' or ':'); anything else is kept literally. This segmentation
    is this package's convention, chosen for consistency, not a published one.
    """
    parts = resource.split(":", 5)
    if len(parts) == 6 and parts[0] == "arn":
        service = parts[2]
        rest = parts[5]
        for sep in ("/", ":"):
            if sep in rest:
                rest = rest.split(sep, 1)[0]
        return f"{service}:{rest}"
    return resource


def corpus_stats(policies: Sequence[Policy]) -> CorpusStats:
    """Exact counts over a corpus of parsed policies."""
    if not policies:
        raise EmptyCorpusError("no policies given")
    per_policy = [len(p.statements) for p in policies]
    services: set[str] = set()
    actions: set[str] = set()
    rtypes: set[str] = set()
    allow = deny = 0
    for policy in policies:
        for stmt in policy.statements:
            if stmt.effect is Effect.ALLOW:
                allow += 1
            else:
                deny += 1
            for a in stmt.action:
                actions.add(a)
                services.add(action_service(a))
            for r in stmt.resource:
                rtypes.add(resource_type(r))
    total = sum(per_policy)
    return CorpusStats(
        total_policies=len(policies),
        total_statements=total,
        avg_statements_per_policy=total / len(policies),
        min_statements_per_policy=min(per_policy),
        max_statements_per_policy=max(per_policy),
        unique_services=len(services),
        unique_actions=len(actions),
        unique_resource_types=len(rtypes),
        allow_count=allow,
        deny_count=deny,
    )
