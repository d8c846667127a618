"""Structured repair prompts, in Base and fault-localization-guided flavors.

Layout is frozen (2-space indentation, LF newlines, fixed section order) and
enforced by golden tests: system instruction, POLICY block with the canonical
JSON, REQUESTS block, optional FAULT LOCALIZATION block, then one
iteration/accuracy annotation line. Base and FL prompts share the same system
instruction so prompt quality never confounds a comparison between the modes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import FingerprintMismatchError
from .evaluation import AccessRequest, RequestSpec
from .localization import FaultCase, FaultEntry, FaultReport, statement_label
from .policy import Effect, Policy, policy_fingerprint, serialize_policy

_CASE_HEADERS = (
    (FaultCase.WRONG_EXPLICIT_ALLOW, "SHOULD BE DENIED BUT EXPLICITLY ALLOWED"),
    (FaultCase.MISSING_ALLOW, "SHOULD BE ALLOWED BUT IMPLICITLY DENIED"),
    (FaultCase.WRONG_EXPLICIT_DENY, "SHOULD BE ALLOWED BUT EXPLICITLY DENIED"),
)


@dataclass(frozen=True)
class PromptContext:
    policy: Policy
    spec: RequestSpec
    iteration: int
    accuracy_percent: float
    report: FaultReport | None = None


@lru_cache(maxsize=1)
def system_instruction() -> str:
    text = (
        resources.files("policyrepair.templates")
        .joinpath("system_instruction.txt")
        .read_text(encoding="utf-8")
    )
    return text.rstrip("\n")


def _render_request(req: AccessRequest) -> str:
    fields = [
        ("Effect", req.expected.value),
        ("Action", f"[{req.action}]"),
        ("Resource", f"[{req.resource}]"),
    ]
    if req.principal is not None:
        fields.append(("Principal", f"[{req.principal}]"))
    if req.context:
        rendered = ", ".join(f"{k}={v}" for k, v in req.context)
        fields.append(("Condition", "{" + rendered + "}"))
    lines = [f"  {name}: {value}," for name, value in fields[:-1]]
    name, value = fields[-1]
    lines.append(f"  {name}: {value}")
    return "\n".join(lines)


def _render_fault_entry(entry: FaultEntry, policy: Policy) -> str:
    expected = entry.request.expected.value.lower()
    got = "allow" if entry.request.expected is Effect.DENY else "deny"
    if entry.responsible:
        responsible = ", ".join(statement_label(policy, i) for i in entry.responsible)
    else:
        responsible = "None (missing allow)"
    return "\n".join(
        [
            f"    Action: [{entry.request.action}]",
            f"    Resource: [{entry.request.resource}]",
            f"    Expected: {expected}, Got: {got}",
            f"    Responsible stmt: {responsible}",
        ]
    )


def _base_sections(ctx: PromptContext) -> list[str]:
    requests = "\n\n".join(_render_request(r) for r in ctx.spec.all_requests())
    return [
        system_instruction(),
        "POLICY:\n" + serialize_policy(ctx.policy),
        "REQUESTS:\n\n" + requests,
    ]


def _annotation(ctx: PromptContext) -> str:
    return f"ITERATION: {ctx.iteration}, ACCURACY: {ctx.accuracy_percent:.1f}%"


def build_base_prompt(ctx: PromptContext) -> str:
    """Policy and requests only: the information an engineer starts from."""
    if ctx.report is not None:
        raise ValueError("base prompt takes a context without a fault report")
    return "\n\n".join(_base_sections(ctx) + [_annotation(ctx)]) + "\n"


def build_fl_prompt(ctx: PromptContext) -> str:
    """Base prompt plus the fault-localization block, grouped under the three
    fixed fault-case headers (empty groups are omitted)."""
    if ctx.report is None:
        raise ValueError("fl prompt needs a fault report")
    if ctx.report.policy_fingerprint != policy_fingerprint(ctx.policy):
        raise FingerprintMismatchError("fault report came from a different policy")
    groups: list[str] = []
    for case, header in _CASE_HEADERS:
        entries = [e for e in ctx.report.entries if e.case is case]
        if not entries:
            continue
        rendered = "\n\n".join(_render_fault_entry(e, ctx.policy) for e in entries)
        groups.append(f"  {header}\n\n{rendered}")
    fl_block = "FAULT LOCALIZATION:\n\n" + "\n\n".join(groups)
    return "\n\n".join(_base_sections(ctx) + [fl_block, _annotation(ctx)]) + "\n"
