"""The iterative repair loop: validate, localize, prompt, synthesize,
re-validate, keeping the best candidate seen.

A candidate that classifies every request correctly is returned immediately
(the verified candidate, not the pre-repair policy). A candidate that strictly
improves accuracy becomes the working policy for the next iteration; ties keep
the incumbent so oscillating candidates cannot thrash the loop.
"""
from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

from .errors import ContradictorySpecError, SynthesisError, SynthesizerUnavailableError
from .evaluation import RequestSpec, Status, validate_goal
from .localization import FaultReport, localize
from .policy import Policy, policy_fingerprint, policy_to_object
from .prompts import PromptContext, build_base_prompt, build_fl_prompt
from .synthesis import Synthesizer, SynthesizerConfig, make_synthesizer


class RepairMode(str, Enum):
    BASE = "base"
    FL_GUIDED = "fl"


class RepairStatus(str, Enum):
    COMPLETE = "CompleteRepair"
    PARTIAL = "PartialRepair"
    FAILURE = "Failure"


@dataclass(frozen=True)
class RepairConfig:
    synthesizer: SynthesizerConfig = SynthesizerConfig()
    max_iterations: int = 5
    mode: RepairMode = RepairMode.FL_GUIDED
    target_accuracy_percent: float = 100.0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 < self.target_accuracy_percent <= 100.0:
            raise ValueError("target accuracy must be in (0, 100]")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    prompt_sha256: str
    accuracy_percent: float | None
    candidate_sha256: str | None
    synth_seconds: float
    validation_seconds: float
    error: str | None = None
    candidate: Policy | None = None  # kept for auditing, not serialized


@dataclass(frozen=True)
class RepairOutcome:
    status: RepairStatus
    best_policy: Policy
    best_accuracy_percent: float
    initial_accuracy_percent: float
    iterations_used: int
    trace: tuple[IterationRecord, ...]


def _status_for(accuracy: float) -> RepairStatus:
    if accuracy >= 100.0:
        return RepairStatus.COMPLETE
    if accuracy >= 80.0:
        return RepairStatus.PARTIAL
    return RepairStatus.FAILURE


def _prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def repair(
    policy: Policy,
    spec: RequestSpec,
    cfg: RepairConfig,
    synthesizer: Synthesizer | None = None,
) -> RepairOutcome:
    """Run the repair loop for one policy against one request specification."""
    overlap = {r.key() for r in spec.must_allow} & {r.key() for r in spec.must_deny}
    if overlap:
        raise ContradictorySpecError(f"{len(overlap)} request tuple(s) in both lists")
    if synthesizer is None:
        synthesizer = make_synthesizer(cfg.synthesizer)

    initial = validate_goal(policy, spec)
    if initial.status is Status.PASS:
        return RepairOutcome(
            status=RepairStatus.COMPLETE,
            best_policy=policy,
            best_accuracy_percent=initial.accuracy_percent,
            initial_accuracy_percent=initial.accuracy_percent,
            iterations_used=0,
            trace=(),
        )

    current, current_val = policy, initial
    best, best_val = policy, initial
    trace: list[IterationRecord] = []
    produced_any = False

    for iteration in range(1, cfg.max_iterations + 1):
        report: FaultReport | None = None
        if cfg.mode is RepairMode.FL_GUIDED:
            report = localize(current, current_val)
        ctx = PromptContext(
            policy=current,
            spec=spec,
            iteration=iteration,
            accuracy_percent=current_val.accuracy_percent,
            report=report,
        )
        prompt = build_fl_prompt(ctx) if report is not None else build_base_prompt(ctx)

        synth_started = time.perf_counter()
        try:
            result = synthesizer.synthesize(
                prompt, policy=current, spec=spec, validation=current_val
            )
        except SynthesisError as exc:
            trace.append(
                IterationRecord(
                    iteration=iteration,
                    prompt_sha256=_prompt_digest(prompt),
                    accuracy_percent=None,
                    candidate_sha256=None,
                    synth_seconds=time.perf_counter() - synth_started,
                    validation_seconds=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            continue
        produced_any = True

        validation_started = time.perf_counter()
        candidate_val = validate_goal(result.candidate, spec)
        validation_seconds = time.perf_counter() - validation_started
        trace.append(
            IterationRecord(
                iteration=iteration,
                prompt_sha256=_prompt_digest(prompt),
                accuracy_percent=candidate_val.accuracy_percent,
                candidate_sha256=candidate_val.policy_fingerprint,
                synth_seconds=result.latency_seconds,
                validation_seconds=validation_seconds,
                candidate=result.candidate,
            )
        )

        if candidate_val.accuracy_percent > best_val.accuracy_percent:
            best, best_val = result.candidate, candidate_val
        if (
            candidate_val.status is Status.PASS
            or candidate_val.accuracy_percent >= cfg.target_accuracy_percent
        ):
            return RepairOutcome(
                status=_status_for(candidate_val.accuracy_percent),
                best_policy=result.candidate,
                best_accuracy_percent=candidate_val.accuracy_percent,
                initial_accuracy_percent=initial.accuracy_percent,
                iterations_used=iteration,
                trace=tuple(trace),
            )
        if candidate_val.accuracy_percent > current_val.accuracy_percent:
            current, current_val = result.candidate, candidate_val

    if not produced_any:
        raise SynthesizerUnavailableError(
            "no iteration produced a candidate policy; last errors: "
            + "; ".join(r.error for r in trace if r.error)
        )
    return RepairOutcome(
        status=_status_for(best_val.accuracy_percent),
        best_policy=best,
        best_accuracy_percent=best_val.accuracy_percent,
        initial_accuracy_percent=initial.accuracy_percent,
        iterations_used=cfg.max_iterations,
        trace=tuple(trace),
    )


def repair_batch(
    jobs: Sequence[tuple[Policy, RequestSpec, RepairConfig]],
    max_workers: int = 1,
    deadline: float | None = None,
) -> list[RepairOutcome | Exception]:
    """Repair many policies with a bounded worker pool; results come back in
    job order, with per-job failures captured instead of raised. Jobs starting
    after the monotonic deadline (when given) come back as TimeoutError."""

    def run(job: tuple[Policy, RequestSpec, RepairConfig]) -> RepairOutcome | Exception:
        policy, spec, cfg = job
        if deadline is not None and time.monotonic() > deadline:
            return TimeoutError("wall-clock budget exhausted")
        try:
            return repair(policy, spec, cfg)
        except Exception as exc:  # fault isolation: one job never kills a batch
            return exc

    if max_workers <= 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, jobs))


# -- JSON wire format --------------------------------------------------------

def record_to_object(record: IterationRecord) -> dict[str, Any]:
    return {
        "iteration": record.iteration,
        "prompt_sha256": record.prompt_sha256,
        "accuracy_percent": record.accuracy_percent,
        "candidate_sha256": record.candidate_sha256,
        "synth_seconds": record.synth_seconds,
        "validation_seconds": record.validation_seconds,
        "error": record.error,
    }


def outcome_to_object(outcome: RepairOutcome) -> dict[str, Any]:
    return {
        "status": outcome.status.value,
        "best_policy": policy_to_object(outcome.best_policy),
        "best_policy_sha256": policy_fingerprint(outcome.best_policy),
        "best_accuracy_percent": outcome.best_accuracy_percent,
        "initial_accuracy_percent": outcome.initial_accuracy_percent,
        "iterations_used": outcome.iterations_used,
        "trace": [record_to_object(r) for r in outcome.trace],
    }
