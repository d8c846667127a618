"""Independent oracles and random instance generators for the test suite.

The matching oracle expands wildcard patterns into regular expressions and the
verdict oracle applies deny-overrides-allow literally, sharing no code with
the package's two-pointer matcher or its evaluator. Alphabets stay ASCII so
regex IGNORECASE and str.lower() case folding agree.
"""
from __future__ import annotations

import random
import re

from policyrepair import AccessRequest, ConditionClause, Effect, Policy, Statement
from policyrepair.evaluation import normalize_context


def pattern_to_regex(pattern: str) -> str:
    out = []
    for ch in pattern:
        if ch == "*":
            out.append(".*")
        elif ch == "?":
            out.append(".")
        else:
            out.append(re.escape(ch))
    return "".join(out)


def regex_match(pattern: str, value: str, case_insensitive: bool = False) -> bool:
    flags = re.DOTALL | (re.IGNORECASE if case_insensitive else 0)
    return re.fullmatch(pattern_to_regex(pattern), value, flags) is not None


def oracle_statement_matches(stmt: Statement, req: AccessRequest) -> bool:
    if stmt.principal is not None:
        principal = req.principal if req.principal is not None else ""
        if not any(regex_match(p, principal) for p in stmt.principal):
            return False
    if not any(regex_match(p, req.action, case_insensitive=True) for p in stmt.action):
        return False
    if not any(regex_match(p, req.resource) for p in stmt.resource):
        return False
    if stmt.condition:
        context = dict(req.context) if req.context else {}
        for clause in stmt.condition:
            actual = context.get(clause.key)
            if actual is None:
                return False
            if clause.operator == "StringEquals":
                if actual not in clause.values:
                    return False
            else:
                if not any(regex_match(v, actual) for v in clause.values):
                    return False
    return True


def oracle_verdict(policy: Policy, req: AccessRequest) -> str:
    allow = deny = False
    for stmt in policy.statements:
        if oracle_statement_matches(stmt, req):
            if stmt.effect is Effect.DENY:
                deny = True
            else:
                allow = True
    if deny:
        return "ExplicitDeny"
    if allow:
        return "Allow"
    return "ImplicitDeny"


# -- random instances over a small alphabet ----------------------------------

_ALPHABET = "abc"
_CONTEXT_KEYS = ("k1", "k2")


def random_pattern(rng: random.Random, max_len: int = 5) -> str:
    chars = _ALPHABET + "*?:"
    return "".join(rng.choice(chars) for _ in range(rng.randint(0, max_len)))


def random_value(rng: random.Random, max_len: int = 5) -> str:
    chars = _ALPHABET + ":"
    return "".join(rng.choice(chars) for _ in range(rng.randint(0, max_len)))


def _random_patterns(rng: random.Random) -> tuple[str, ...]:
    return tuple(random_pattern(rng) for _ in range(rng.randint(1, 2)))


def random_statement(rng: random.Random) -> Statement:
    condition = None
    if rng.random() < 0.2:
        # (operator, key) pairs must be distinct: the JSON condition format
        # cannot carry duplicates, so parsed policies never have them.
        pairs = [("StringEquals", "k1"), ("StringEquals", "k2"), ("StringLike", "k1"), ("StringLike", "k2")]
        condition = tuple(
            ConditionClause(operator=op, key=key, values=_random_patterns(rng))
            for op, key in rng.sample(pairs, rng.randint(1, 2))
        )
    return Statement(
        effect=Effect.DENY if rng.random() < 0.35 else Effect.ALLOW,
        action=_random_patterns(rng),
        resource=_random_patterns(rng),
        principal=_random_patterns(rng) if rng.random() < 0.25 else None,
        condition=condition,
    )


def random_policy(rng: random.Random, max_statements: int = 4) -> Policy:
    return Policy(
        statements=tuple(
            random_statement(rng) for _ in range(rng.randint(1, max_statements))
        )
    )


def random_request(rng: random.Random, expected: Effect | None = None) -> AccessRequest:
    context = None
    if rng.random() < 0.6:
        context = normalize_context(
            [
                (rng.choice(_CONTEXT_KEYS), random_value(rng, 3))
                for _ in range(rng.randint(1, 2))
            ]
        )
    return AccessRequest(
        action=random_value(rng),
        resource=random_value(rng),
        expected=expected
        if expected is not None
        else rng.choice((Effect.ALLOW, Effect.DENY)),
        principal=random_value(rng, 3) if rng.random() < 0.5 else None,
        context=context,
    )
