"""Synthetic request-suite generation from a policy's own structure.

Element extraction instantiates wildcard patterns into concrete representatives
drawn from a fixed embedded lexicon, so generation is reproducible from
(policy, n, rho, seed) alone. Sampling is verified: every must-allow request
is evaluated Allow by the source policy and every must-deny request evaluates
to a deny verdict, before an optional seeded subset has its label flipped and
one attribute modified to plant verified misclassifications.
"""
from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import InsufficientCombinationsError
from .evaluation import (
    AccessRequest,
    Context,
    RequestSpec,
    Verdict,
    evaluate,
    normalize_context,
)
from .policy import Effect, Policy

# Closed vocabulary for instantiating wildcard patterns. Reproducibility
# requires a fixed table; the words below are arbitrary but stable.
ACTION_WORDS = (
    "GetObject", "PutObject", "ListBucket", "DeleteObject", "GetItem",
    "PutItem", "Query", "Scan", "UpdateItem", "DescribeInstances",
    "StartInstances", "StopInstances", "RunInstances", "InvokeFunction",
    "ListFunctions", "SendMessage", "ReceiveMessage", "GetQueueUrl",
    "GetRole", "ListRoles", "CreateUser", "GetUser", "ListUsers",
    "Decrypt", "Encrypt", "DescribeKey", "Publish", "Subscribe",
    "PutLogEvents", "CreateLogStream", "DescribeLogGroups",
    "StartQueryExecution", "GetQueryResults", "AssumeRole",
    "GetAccountSummary", "TagResource", "UntagResource",
    "GetBucketLocation", "HeadObject", "BatchGetItem",
)
SERVICE_WORDS = (
    "s3", "ec2", "iam", "sqs", "sns", "dynamodb",
    "lambda", "kms", "logs", "athena", "glue", "sts",
)
RESOURCE_WORDS = (
    "report.csv", "index.html", "app.log", "data.json", "archive.zip",
    "notes.txt", "image.png", "backup.tar", "metrics.db", "readme.md",
    "config.yaml", "summary.pdf", "invoice-01", "orders-feed", "daily",
    "weekly", "primary", "secondary", "staging", "prod",
)
PRINCIPAL_WORDS = (
    "alice", "bob", "carol", "dave", "erin", "frank",
    "deploy", "auditor", "ci-runner", "analyst", "svc-api", "svc-worker",
)
CONTEXT_WORDS = ("alpha", "beta", "gamma", "delta", "edge", "core")
QUESTION_MARK_CHARS = "abcdefgh0123"

# Values used only to build complements: actions from services no corpus
# policy plausibly grants, and principals from a foreign account.
FOREIGN_ACTIONS = (
    "backup:StartBackupJob", "robomaker:ListRobots", "gamelift:CreateFleet",
    "workmail:ListOrganizations", "medialive:StartChannel",
    "snowball:CreateJob", "braket:CreateQuantumTask",
    "groundstation:ListSatellites", "kendra:CreateIndex", "ivs:ListChannels",
)
FOREIGN_PRINCIPALS = (
    "arn:aws:iam::999999999999:user/mallory",
    "arn:aws:iam::999999999999:role/intruder",
    "arn:aws:iam::888888888888:user/guest",
)

_REPS_PER_PATTERN = 40
_MAX_ACTIONS = 80
_MAX_RESOURCES = 80
_MAX_PRINCIPALS = 16
_MAX_CONDITIONS = 12


@dataclass(frozen=True)
class PolicyElements:
    """Concrete values extracted from a policy, wildcards instantiated.

    The conditions pool holds complete context assignments, one satisfying
    assignment set per condition-bearing statement.
    """

    actions: tuple[str, ...]
    resources: tuple[str, ...]
    principals: tuple[str, ...]
    conditions: tuple[Context, ...]
    source: Policy


@dataclass(frozen=True)
class GenConfig:
    n: int
    rho: float
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")


def _derive_seed(seed: int, phase: str) -> int:
    # str-based hashing would vary per process (PYTHONHASHSEED); sha256 is
    # stable across runs.
    digest = hashlib.sha256(f"{seed}:{phase}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _dedup(values: Iterable) -> tuple:
    return tuple(dict.fromkeys(values))


def _instantiate(pattern: str, rng: random.Random, segment: Callable[[random.Random], str],
                 limit: int = _REPS_PER_PATTERN) -> list[str]:
    """Concrete representatives of one wildcard pattern."""
    if "*" not in pattern and "?" not in pattern:
        return [pattern]
    out: dict[str, None] = {}
    attempts = 0
    while len(out) < limit and attempts < limit * 10:
        attempts += 1
        chars: list[str] = []
        for ch in pattern:
            if ch == "*":
                chars.append(segment(rng))
            elif ch == "?":
                chars.append(rng.choice(QUESTION_MARK_CHARS))
            else:
                chars.append(ch)
        out["".join(chars)] = None
    return list(out)


def _action_segment(rng: random.Random) -> str:
    return rng.choice(ACTION_WORDS)


def _resource_segment(rng: random.Random) -> str:
    word = rng.choice(RESOURCE_WORDS)
    if rng.random() < 0.5:
        return word
    return word + rng.choice("/-") + rng.choice(RESOURCE_WORDS)


def _principal_segment(rng: random.Random) -> str:
    return rng.choice(PRINCIPAL_WORDS)


def _context_segment(rng: random.Random) -> str:
    return rng.choice(CONTEXT_WORDS)


def _instantiate_action(pattern: str, rng: random.Random) -> list[str]:
    if pattern == "*":
        out: dict[str, None] = {}
        attempts = 0
        while len(out) < _REPS_PER_PATTERN and attempts < _REPS_PER_PATTERN * 10:
            attempts += 1
            out[f"{rng.choice(SERVICE_WORDS)}:{rng.choice(ACTION_WORDS)}"] = None
        return list(out)
    return _instantiate(pattern, rng, _action_segment)


def extract_elements(policy: Policy, seed: int = 0) -> PolicyElements:
    """Collect and instantiate every action/resource/principal/condition value."""
    rng = random.Random(_derive_seed(seed, "elements"))
    actions: list[str] = []
    resources: list[str] = []
    principals: list[str] = []
    conditions: list[Context] = []
    for stmt in policy.statements:
        for pattern in stmt.action:
            actions.extend(_instantiate_action(pattern, rng))
        for pattern in stmt.resource:
            resources.extend(_instantiate(pattern, rng, _resource_segment))
        for pattern in stmt.principal or ():
            principals.extend(_instantiate(pattern, rng, _principal_segment))
        if stmt.condition:
            # A few complete satisfying assignments per statement.
            for variant in range(3):
                pairs = []
                for clause in stmt.condition:
                    value = clause.values[variant % len(clause.values)]
                    concrete = _instantiate(value, rng, _context_segment, limit=4)
                    pairs.append((clause.key, concrete[min(variant, len(concrete) - 1)]))
                ctx = normalize_context(pairs)
                if ctx is not None:
                    conditions.append(ctx)
    return PolicyElements(
        actions=_dedup(actions)[:_MAX_ACTIONS],
        resources=_dedup(resources)[:_MAX_RESOURCES],
        principals=_dedup(principals)[:_MAX_PRINCIPALS],
        conditions=_dedup(conditions)[:_MAX_CONDITIONS],
        source=policy,
    )


def _perturb_resource(resource: str) -> list[str]:
    parts = resource.split(":", 5)
    if len(parts) == 6 and parts[0] == "arn":
        variants = []
        for index, replacement in ((3, "us-iso-west-1"), (4, "000000000000"), (2, "fakesvc")):
            swapped = list(parts)
            swapped[index] = replacement
            variants.append(":".join(swapped))
        tail = list(parts)
        tail[5] = "denied/" + parts[5]
        variants.append(":".join(tail))
        return variants
    return [resource + "-denied"]


def _perturbed_resources(resources: Sequence[str], limit: int = 160) -> tuple[str, ...]:
    out: list[str] = []
    for r in resources:
        out.extend(_perturb_resource(r))
    return _dedup(out)[:limit]


def _perturbed_conditions(conditions: Sequence[Context]) -> tuple[Context, ...]:
    out = []
    for ctx in conditions:
        mangled = normalize_context([(k, v + "-x") for k, v in ctx])
        if mangled is not None:
            out.append(mangled)
    return _dedup(out)


def _collect_requests(
    axes: Sequence[Sequence],
    expected: Effect,
    wanted: Verdict | None,
    k: int,
    rng: random.Random,
    policy: Policy,
) -> list[AccessRequest]:
    """Draw distinct (action, resource, principal, context) tuples whose
    evaluation matches the wanted side (Allow, or any deny when wanted is
    None ... deny). Random draws first, then an exhaustive sweep so that
    InsufficientCombinations is exact."""
    found: dict[tuple, AccessRequest] = {}
    if k == 0:
        return []

    def consider(combo: tuple) -> None:
        action, resource, principal, context = combo
        req = AccessRequest(
            action=action, resource=resource, expected=expected,
            principal=principal, context=context,
        )
        if req.key() in found:
            return
        verdict = evaluate(policy, req).verdict
        ok = verdict is Verdict.ALLOW if wanted is Verdict.ALLOW else verdict.is_deny
        if ok:
            found[req.key()] = req

    sizes = [len(ax) for ax in axes]
    max_draws = max(400, 60 * k)
    for _ in range(max_draws):
        if len(found) >= k:
            break
        consider(tuple(ax[rng.randrange(size)] for ax, size in zip(axes, sizes)))
    if len(found) < k:
        for combo in itertools.product(*axes):
            consider(combo)
            if len(found) >= k:
                break
    if len(found) < k:
        raise InsufficientCombinationsError(
            f"only {len(found)} distinct {expected.value.lower()}-side tuples exist, "
            f"{k} requested"
        )
    return list(found.values())[:k]


def _allowed_axes(elements: PolicyElements) -> list[Sequence]:
    return [
        elements.actions,
        elements.resources,
        (None, *elements.principals),
        (None, *elements.conditions),
    ]


def _denied_axes(elements: PolicyElements) -> list[Sequence]:
    actions = _dedup((*elements.actions, *FOREIGN_ACTIONS))
    resources = _dedup((*elements.resources, *_perturbed_resources(elements.resources)))
    principals = (None, *_dedup((*elements.principals, *FOREIGN_PRINCIPALS)))
    conditions = (None, *_dedup((*elements.conditions, *_perturbed_conditions(elements.conditions))))
    return [actions, resources, principals, conditions]


def sample_allowed(elements: PolicyElements, k: int, seed: int) -> list[AccessRequest]:
    """k distinct requests the source policy allows, labeled must-allow."""
    rng = random.Random(_derive_seed(seed, "allowed"))
    return _collect_requests(
        _allowed_axes(elements), Effect.ALLOW, Verdict.ALLOW, k, rng, elements.source
    )


def sample_denied(elements: PolicyElements, k: int, seed: int) -> list[AccessRequest]:
    """k distinct requests the source policy denies (either deny verdict),
    built from complements of the extracted elements."""
    rng = random.Random(_derive_seed(seed, "denied"))
    return _collect_requests(
        _denied_axes(elements), Effect.DENY, None, k, rng, elements.source
    )


def _misclassified(policy: Policy, req: AccessRequest) -> bool:
    verdict = evaluate(policy, req).verdict
    if req.expected is Effect.DENY:
        return verdict is Verdict.ALLOW
    return verdict.is_deny


def _modification_candidates(
    attr: str, req: AccessRequest, pools: dict[str, Sequence]
) -> list[AccessRequest]:
    out = []
    for value in pools[attr]:
        if attr == "resource":
            if value == req.resource:
                continue
            out.append(AccessRequest(req.action, value, req.expected, req.principal, req.context))
        elif attr == "principal":
            if value == req.principal:
                continue
            out.append(AccessRequest(req.action, req.resource, req.expected, value, req.context))
        else:
            if value == req.context:
                continue
            out.append(AccessRequest(req.action, req.resource, req.expected, req.principal, value))
    return out


def _flip_and_modify(
    req: AccessRequest,
    policy: Policy,
    pools: dict[str, Sequence],
    used: set[tuple],
    rng: random.Random,
) -> AccessRequest | None:
    """Invert the expected label, then change exactly one of resource,
    principal, or condition such that the request stays misclassified by the
    source policy and its tuple stays unique. None when no single-attribute
    change qualifies."""
    flipped = AccessRequest(
        req.action, req.resource,
        Effect.DENY if req.expected is Effect.ALLOW else Effect.ALLOW,
        req.principal, req.context,
    )
    qualifying: dict[str, list[AccessRequest]] = {}
    for attr in ("resource", "principal", "condition"):
        options = [
            cand
            for cand in _modification_candidates(attr, flipped, pools)
            if cand.key() not in used and _misclassified(policy, cand)
        ]
        if options:
            qualifying[attr] = options
    if not qualifying:
        return None
    attr = rng.choice(sorted(qualifying))
    return rng.choice(qualifying[attr])


def generate_requests(policy: Policy, cfg: GenConfig) -> RequestSpec:
    """Full generation: a 60/40 allow/deny split, then a seeded fraction rho
    flipped and modified into verified misclassifications."""
    elements = extract_elements(policy, cfg.seed)
    k_allow = (6 * cfg.n) // 10
    k_deny = cfg.n - k_allow
    allowed = sample_allowed(elements, k_allow, cfg.seed)
    denied = sample_denied(elements, k_deny, cfg.seed)
    requests: list[AccessRequest] = [*allowed, *denied]

    flip_count = math.floor(Fraction(str(cfg.rho)) * cfg.n)
    if flip_count:
        rng = random.Random(_derive_seed(cfg.seed, "flip"))
        _, res_pool, pri_pool, ctx_pool = _denied_axes(elements)
        pools: dict[str, Sequence] = {
            "resource": res_pool,
            "principal": pri_pool,
            "condition": ctx_pool,
        }
        used = {r.key() for r in requests}
        order = rng.sample(range(cfg.n), cfg.n)
        flipped = 0
        for index in order:
            if flipped == flip_count:
                break
            original = requests[index]
            replacement = _flip_and_modify(original, policy, pools, used, rng)
            if replacement is None:
                continue
            used.discard(original.key())
            used.add(replacement.key())
            requests[index] = replacement
            flipped += 1
        if flipped < flip_count:
            raise InsufficientCombinationsError(
                f"could only plant {flipped} of {flip_count} misclassifications"
            )
    return RequestSpec(
        must_allow=tuple(r for r in requests if r.expected is Effect.ALLOW),
        must_deny=tuple(r for r in requests if r.expected is Effect.DENY),
    )
