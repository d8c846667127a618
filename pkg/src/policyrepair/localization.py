"""Fault localization: map each misclassified request to responsible statements.

Three fault cases cover every misclassification:
  - WrongExplicitAllow: a must-deny request that some Allow statement admits.
    Responsible statements are those that allow the request on their own.
  - WrongExplicitDeny: a must-allow request that some Deny statement blocks.
    A Deny statement is responsible when it still denies the request after
    being joined with the universal-allow policy.
  - MissingAllow: a must-allow request no statement covers (implicit deny).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from .errors import FingerprintMismatchError, NoMisclassificationsError
from .evaluation import (
    AccessRequest,
    Status,
    ValidationResult,
    Verdict,
    evaluate,
    request_correct,
    request_to_object,
)
from .policy import Effect, Policy, Statement, policy_fingerprint


class FaultCase(str, Enum):
    WRONG_EXPLICIT_ALLOW = "WrongExplicitAllow"
    WRONG_EXPLICIT_DENY = "WrongExplicitDeny"
    MISSING_ALLOW = "MissingAllow"


@dataclass(frozen=True)
class FaultEntry:
    request: AccessRequest
    case: FaultCase
    responsible: tuple[int, ...]


@dataclass(frozen=True)
class FaultReport:
    entries: tuple[FaultEntry, ...]
    policy_fingerprint: str


def universal_allow() -> Policy:
    """Single Allow statement over every action and resource, no principal or
    conditions. Joined with one Deny statement it isolates whether that
    statement explicitly denies a request."""
    return Policy(statements=(Statement(effect=Effect.ALLOW, action=("*",), resource=("*",)),))


def _with_universal_allow(stmt: Statement) -> Policy:
    return Policy(statements=universal_allow().statements + (stmt,))


def localize(policy: Policy, validation: ValidationResult) -> FaultReport:
    """Build the fault report for every misclassified request, in request
    order, with responsible statement indices ascending."""
    fingerprint = policy_fingerprint(policy)
    if validation.policy_fingerprint != fingerprint:
        raise FingerprintMismatchError("validation result came from a different policy")
    if validation.status is Status.PASS:
        raise NoMisclassificationsError("validation passed; nothing to localize")

    entries: list[FaultEntry] = []
    for req, decision in validation.per_request:
        if request_correct(req, decision):
            continue
        if req.expected is Effect.DENY and decision.verdict is Verdict.ALLOW:
            responsible = tuple(
                i
                for i, stmt in enumerate(policy.statements)
                if stmt.effect is Effect.ALLOW
                and evaluate(Policy(statements=(stmt,)), req).verdict is Verdict.ALLOW
            )
            entries.append(FaultEntry(req, FaultCase.WRONG_EXPLICIT_ALLOW, responsible))
        else:
            responsible = tuple(
                i
                for i, stmt in enumerate(policy.statements)
                if stmt.effect is Effect.DENY
                and evaluate(_with_universal_allow(stmt), req).verdict is Verdict.EXPLICIT_DENY
            )
            if responsible:
                entries.append(FaultEntry(req, FaultCase.WRONG_EXPLICIT_DENY, responsible))
            else:
                entries.append(FaultEntry(req, FaultCase.MISSING_ALLOW, ()))
    return FaultReport(entries=tuple(entries), policy_fingerprint=fingerprint)


def statement_label(policy: Policy, index: int) -> str:
    """Sid when present, else a positional reference."""
    sid = policy.statements[index].sid
    return sid if sid is not None else f"stmt[{index}]"


def report_to_object(report: FaultReport, policy: Policy) -> dict[str, Any]:
    """JSON form for logging and for the prompt builder."""
    return {
        "policy_fingerprint": report.policy_fingerprint,
        "entries": [
            {
                "request": request_to_object(e.request, include_expected=True),
                "case": e.case.value,
                "responsible": list(e.responsible),
                "responsible_labels": [statement_label(policy, i) for i in e.responsible],
            }
            for e in report.entries
        ],
    }
