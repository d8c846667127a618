"""SMT-LIB v2 emission for (policy, request) pairs.

The script constrains string variables for principal/action/resource (and one
per context key) to the concrete request values and asserts the allow
semantics: some Allow statement matches and no Deny statement matches. It is
satisfiable exactly when the native evaluator answers Allow, which keeps an
external solver usable as a cross-check.
"""
from __future__ import annotations

import re

from .errors import UnsupportedConstructError
from .evaluation import AccessRequest
from .policy import (
    SUPPORTED_CONDITION_OPERATORS,
    ConditionClause,
    Effect,
    Policy,
    Statement,
)


def _smt_string(value: str) -> str:
    return '"' + value.replace('"', '""') + '"'


def _pattern_to_regex(pattern: str) -> str:
    """Wildcard pattern as an SMT regex term: '*' -> re.all, '?' -> re.allchar."""
    parts: list[str] = []
    literal: list[str] = []

    def flush() -> None:
        if literal:
            parts.append(f"(str.to_re {_smt_string(''.join(literal))})")
            literal.clear()

    for ch in pattern:
        if ch == "*":
            flush()
            parts.append("re.all")
        elif ch == "?":
            flush()
            parts.append("re.allchar")
        else:
            literal.append(ch)
    flush()
    if not parts:
        return '(str.to_re "")'
    if len(parts) == 1:
        return parts[0]
    return "(re.++ " + " ".join(parts) + ")"


def _membership(var: str, patterns: tuple[str, ...], lowercase: bool = False) -> str:
    terms = [
        f"(str.in_re {var} {_pattern_to_regex(p.lower() if lowercase else p)})"
        for p in patterns
    ]
    return terms[0] if len(terms) == 1 else "(or " + " ".join(terms) + ")"


def _clause_term(clause: ConditionClause, ctx_vars: dict[str, str]) -> str:
    if clause.operator not in SUPPORTED_CONDITION_OPERATORS:
        raise UnsupportedConstructError(
            f"cannot encode condition operator {clause.operator!r}"
        )
    var = ctx_vars.get(clause.key)
    if var is None:
        # Key absent from the request context: the clause cannot be satisfied.
        return "false"
    if clause.operator == "StringEquals":
        terms = [f"(= {var} {_smt_string(v)})" for v in clause.values]
        return terms[0] if len(terms) == 1 else "(or " + " ".join(terms) + ")"
    return _membership(var, clause.values)


def _statement_term(stmt: Statement, ctx_vars: dict[str, str]) -> str:
    conjuncts: list[str] = []
    if stmt.principal is not None:
        conjuncts.append(_membership("principal", stmt.principal))
    conjuncts.append(_membership("action", stmt.action, lowercase=True))
    conjuncts.append(_membership("resource", stmt.resource))
    if stmt.condition:
        for clause in stmt.condition:
            conjuncts.append(_clause_term(clause, ctx_vars))
    if len(conjuncts) == 1:
        return conjuncts[0]
    return "(and " + " ".join(conjuncts) + ")"


def _ctx_var_name(key: str, taken: set[str]) -> str:
    base = "ctx_" + re.sub(r"[^A-Za-z0-9_]", "_", key)
    name = base
    i = 1
    while name in taken:
        name = f"{base}_{i}"
        i += 1
    taken.add(name)
    return name


def encode_smtlib(policy: Policy, req: AccessRequest) -> str:
    """Standard SMT-LIB v2 script; sat iff evaluate(policy, req) is Allow."""
    lines = ["(set-logic QF_S)"]
    lines.append("(declare-const principal String)")
    lines.append("(declare-const action String)")
    lines.append("(declare-const resource String)")

    taken: set[str] = set()
    ctx_vars: dict[str, str] = {}
    for key, value in req.context or ():
        ctx_vars[key] = _ctx_var_name(key, taken)
        lines.append(f"(declare-const {ctx_vars[key]} String)")

    lines.append(f"(assert (= principal {_smt_string(req.principal or '')}))")
    lines.append(f"(assert (= action {_smt_string(req.action.lower())}))")
    lines.append(f"(assert (= resource {_smt_string(req.resource)}))")
    for key, value in req.context or ():
        lines.append(f"(assert (= {ctx_vars[key]} {_smt_string(value)}))")

    allow_terms: list[str] = []
    deny_terms: list[str] = []
    for i, stmt in enumerate(policy.statements):
        lines.append(f"(define-fun stmt{i} () Bool {_statement_term(stmt, ctx_vars)})")
        (allow_terms if stmt.effect is Effect.ALLOW else deny_terms).append(f"stmt{i}")

    if allow_terms:
        allowed = allow_terms[0] if len(allow_terms) == 1 else "(or " + " ".join(allow_terms) + ")"
    else:
        allowed = "false"
    lines.append(f"(assert {allowed})")
    if deny_terms:
        denied = deny_terms[0] if len(deny_terms) == 1 else "(or " + " ".join(deny_terms) + ")"
        lines.append(f"(assert (not {denied}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
