"""Batch experiment runner and analysis: accuracy bins, Welch's t-test, and
the aggregate tables.

Accuracy bins follow the complete/moderate/failed convention: exactly 100%,
80 to just under 100%, and below 80%. Request suites are persisted under the
output directory so every prompt mode consumes identical specs, and a manifest
records (policy file, n, rho, seed) for each suite.
"""
from __future__ import annotations

import json
import math
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from scipy.stats import t as t_distribution

from .errors import DegenerateSampleError, EmptyCorpusError, PolicyRepairError
from .evaluation import RequestSpec, parse_spec, serialize_spec
from .generation import GenConfig, generate_requests
from .policy import Policy, normalize_policy
from .repair import (
    RepairConfig,
    RepairMode,
    RepairOutcome,
    outcome_to_object,
    repair_batch,
)
from .synthesis import SynthesizerConfig


@dataclass(frozen=True)
class Bins:
    complete: int
    moderate: int
    failed: int

    def total(self) -> int:
        return self.complete + self.moderate + self.failed


def bin_of(accuracy_percent: float) -> str:
    """'complete' at exactly 100, 'moderate' in [80, 100), 'failed' below 80."""
    if accuracy_percent >= 100.0:
        return "complete"
    if accuracy_percent >= 80.0:
        return "moderate"
    return "failed"


def bin_outcomes(outcomes: Sequence[RepairOutcome]) -> Bins:
    counts = {"complete": 0, "moderate": 0, "failed": 0}
    for outcome in outcomes:
        counts[bin_of(outcome.best_accuracy_percent)] += 1
    return Bins(**counts)


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Welch's unequal-variance two-sample t-test.

    Returns (t, two-tailed p) with Welch-Satterthwaite degrees of freedom.
    """
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSampleError("both samples need at least 2 observations")
    va = statistics.variance(a)
    vb = statistics.variance(b)
    if va == 0.0 and vb == 0.0:
        raise DegenerateSampleError("both samples have zero variance")
    sa = va / len(a)
    sb = vb / len(b)
    se = math.sqrt(sa + sb)
    t_stat = (statistics.fmean(a) - statistics.fmean(b)) / se
    df = (sa + sb) ** 2 / (sa**2 / (len(a) - 1) + sb**2 / (len(b) - 1))
    p_two_tailed = 2.0 * float(t_distribution.sf(abs(t_stat), df))
    return t_stat, p_two_tailed


# -- batch running -----------------------------------------------------------

@dataclass(frozen=True)
class BatchConfig:
    sizes: tuple[int, ...] = (10,)
    rho: float = 0.2
    seed: int = 0
    modes: tuple[RepairMode, ...] = (RepairMode.BASE, RepairMode.FL_GUIDED)
    synthesizer: SynthesizerConfig = SynthesizerConfig()
    max_iterations: int = 5
    workers: int = 1
    # Global wall-clock budget; the study convention is no timeout, so this
    # defaults off.
    wall_clock_budget_seconds: float | None = None


@dataclass(frozen=True)
class ApproachSummary:
    bins: Bins
    mean_accuracy_percent: float
    avg_iterations: float
    avg_total_seconds: float
    avg_synth_seconds: float
    avg_validation_seconds: float


@dataclass(frozen=True)
class BatchReport:
    per_policy: tuple[dict[str, Any], ...]
    bins: Bins
    approaches: dict[str, ApproachSummary]
    significance: tuple[float, float] | None
    skipped: tuple[dict[str, str], ...]


def _record_times(outcome_obj: dict[str, Any]) -> tuple[float, float]:
    synth = sum(r["synth_seconds"] for r in outcome_obj["trace"])
    validation = sum(r["validation_seconds"] for r in outcome_obj["trace"])
    return synth, validation


def _summarize(records: Sequence[dict[str, Any]]) -> ApproachSummary:
    accuracies = [r["outcome"]["best_accuracy_percent"] for r in records]
    counts = {"complete": 0, "moderate": 0, "failed": 0}
    for acc in accuracies:
        counts[bin_of(acc)] += 1
    synth_times, validation_times = zip(*(_record_times(r["outcome"]) for r in records))
    return ApproachSummary(
        bins=Bins(**counts),
        mean_accuracy_percent=statistics.fmean(accuracies),
        avg_iterations=statistics.fmean(r["outcome"]["iterations_used"] for r in records),
        avg_total_seconds=statistics.fmean(s + v for s, v in zip(synth_times, validation_times)),
        avg_synth_seconds=statistics.fmean(synth_times),
        avg_validation_seconds=statistics.fmean(validation_times),
    )


def load_corpus(corpus_dir: Path) -> tuple[list[tuple[str, Policy]], list[dict[str, str]]]:
    """Normalize every *.json policy in the directory; unparseable files are
    reported, not fatal."""
    policies: list[tuple[str, Policy]] = []
    skipped: list[dict[str, str]] = []
    for path in sorted(Path(corpus_dir).glob("*.json")):
        try:
            policies.append((path.name, normalize_policy(path.read_text(encoding="utf-8"))))
        except PolicyRepairError as exc:
            skipped.append({"file": path.name, "reason": f"{type(exc).__name__}: {exc}"})
    if not policies:
        raise EmptyCorpusError(f"no parseable policy in {corpus_dir}")
    return policies, skipped


def _suite_path(suites_dir: Path, name: str, n: int, rho: float, seed: int) -> Path:
    stem = Path(name).stem
    return suites_dir / f"{stem}__n{n}_rho{rho}_seed{seed}.json"


def run_batch(corpus_dir: Path, cfg: BatchConfig, output_dir: Path) -> BatchReport:
    """Full experiment matrix: every policy x request size x mode.

    Artifacts: suites/ (request specs + manifest.json), outcomes.jsonl,
    report.json, report.txt. Per-policy failures are recorded under skipped
    and never abort the batch.
    """
    started = time.monotonic()
    output_dir = Path(output_dir)
    suites_dir = output_dir / "suites"
    suites_dir.mkdir(parents=True, exist_ok=True)
    policies, skipped = load_corpus(corpus_dir)

    manifest: list[dict[str, Any]] = []
    suites: dict[tuple[str, int], RequestSpec] = {}
    for name, policy in policies:
        for n in cfg.sizes:
            path = _suite_path(suites_dir, name, n, cfg.rho, cfg.seed)
            try:
                if path.exists():
                    spec = parse_spec(path.read_text(encoding="utf-8"))
                else:
                    spec = generate_requests(policy, GenConfig(n=n, rho=cfg.rho, seed=cfg.seed))
                    path.write_text(serialize_spec(spec), encoding="utf-8")
            except PolicyRepairError as exc:
                skipped.append(
                    {"file": name, "reason": f"n={n}: {type(exc).__name__}: {exc}"}
                )
                continue
            suites[(name, n)] = spec
            manifest.append(
                {"policy": name, "n": n, "rho": cfg.rho, "seed": cfg.seed, "suite": path.name}
            )
    (suites_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )

    jobs: list[tuple[str, int, RepairMode, Policy, RequestSpec]] = []
    for mode in cfg.modes:
        for name, policy in policies:
            for n in cfg.sizes:
                spec = suites.get((name, n))
                if spec is not None:
                    jobs.append((name, n, mode, policy, spec))

    repair_cfg_by_mode = {
        mode: RepairConfig(
            synthesizer=cfg.synthesizer, max_iterations=cfg.max_iterations, mode=mode
        )
        for mode in cfg.modes
    }
    deadline = (
        started + cfg.wall_clock_budget_seconds
        if cfg.wall_clock_budget_seconds is not None
        else None
    )
    results = repair_batch(
        [(policy, spec, repair_cfg_by_mode[mode]) for _, _, mode, policy, spec in jobs],
        max_workers=cfg.workers,
        deadline=deadline,
    )

    records: list[dict[str, Any]] = []
    for (name, n, mode, _, _), result in zip(jobs, results):
        if isinstance(result, Exception):
            skipped.append(
                {
                    "file": name,
                    "reason": f"n={n} mode={mode.value}: {type(result).__name__}: {result}",
                }
            )
            continue
        records.append(
            {
                "policy": name,
                "n": n,
                "rho": cfg.rho,
                "seed": cfg.seed,
                "mode": mode.value,
                "outcome": outcome_to_object(result),
            }
        )
    records.sort(key=lambda r: (r["policy"], r["n"], r["mode"]))

    with (output_dir / "outcomes.jsonl").open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")

    report = build_report(records, skipped)
    (output_dir / "report.json").write_text(
        json.dumps(report_to_object(report), indent=2) + "\n", encoding="utf-8"
    )
    (output_dir / "report.txt").write_text(render_report(report), encoding="utf-8")
    return report


def build_report(
    records: Sequence[dict[str, Any]], skipped: Sequence[dict[str, str]] = ()
) -> BatchReport:
    """Aggregate outcome records (as produced by run_batch or read back from
    outcomes.jsonl) into bins, per-approach summaries, and significance."""
    counts = {"complete": 0, "moderate": 0, "failed": 0}
    for record in records:
        counts[bin_of(record["outcome"]["best_accuracy_percent"])] += 1
    approaches: dict[str, ApproachSummary] = {}
    for mode in sorted({r["mode"] for r in records}):
        approaches[mode] = _summarize([r for r in records if r["mode"] == mode])

    significance: tuple[float, float] | None = None
    if len(approaches) == 2:
        first, second = sorted(approaches)
        acc = {
            mode: [
                r["outcome"]["best_accuracy_percent"]
                for r in sorted(
                    (r for r in records if r["mode"] == mode),
                    key=lambda r: (r["policy"], r["n"]),
                )
            ]
            for mode in (first, second)
        }
        try:
            _, p_value = welch_ttest(acc[second], acc[first])
            delta = statistics.fmean(acc[second]) - statistics.fmean(acc[first])
            significance = (delta, p_value)
        except DegenerateSampleError:
            significance = None

    return BatchReport(
        per_policy=tuple(records),
        bins=Bins(**counts),
        approaches=approaches,
        significance=significance,
        skipped=tuple(skipped),
    )


def report_to_object(report: BatchReport) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "bins": {
            "complete": report.bins.complete,
            "moderate": report.bins.moderate,
            "failed": report.bins.failed,
        },
        "approaches": {
            mode: {
                "bins": {
                    "complete": summary.bins.complete,
                    "moderate": summary.bins.moderate,
                    "failed": summary.bins.failed,
                },
                "mean_accuracy_percent": summary.mean_accuracy_percent,
                "avg_iterations": summary.avg_iterations,
                "avg_total_seconds": summary.avg_total_seconds,
                "avg_synth_seconds": summary.avg_synth_seconds,
                "avg_validation_seconds": summary.avg_validation_seconds,
            }
            for mode, summary in report.approaches.items()
        },
        "significance": None,
        "skipped": list(report.skipped),
        "records": list(report.per_policy),
    }
    if report.significance is not None:
        delta, p_value = report.significance
        obj["significance"] = {"delta_pp": delta, "p_value": p_value}
    return obj


def _percent(count: int, total: int) -> str:
    # Percentages are always recomputed from counts, never trusted from
    # elsewhere.
    return f"{count} ({100.0 * count / total:.2f}%)" if total else "0"


def render_report(report: BatchReport) -> str:
    """Plain-text tables: accuracy distribution and timing per approach."""
    lines = ["Repair accuracy distribution", "=" * 60]
    header = f"{'approach':<10}{'100%':>16}{'80-99%':>16}{'<80%':>16}"
    lines.append(header)
    for mode, summary in report.approaches.items():
        total = summary.bins.total()
        lines.append(
            f"{mode:<10}"
            f"{_percent(summary.bins.complete, total):>16}"
            f"{_percent(summary.bins.moderate, total):>16}"
            f"{_percent(summary.bins.failed, total):>16}"
        )
    lines.append("")
    lines.append("Timing and iterations")
    lines.append("=" * 60)
    lines.append(
        f"{'approach':<10}{'mean acc %':>12}{'avg iter':>10}"
        f"{'total s':>10}{'synth s':>10}{'valid s':>10}"
    )
    for mode, summary in report.approaches.items():
        lines.append(
            f"{mode:<10}{summary.mean_accuracy_percent:>12.2f}"
            f"{summary.avg_iterations:>10.2f}{summary.avg_total_seconds:>10.3f}"
            f"{summary.avg_synth_seconds:>10.3f}{summary.avg_validation_seconds:>10.3f}"
        )
    lines.append("")
    if report.significance is not None:
        delta, p_value = report.significance
        marker = " (not significant)" if p_value > 0.05 else ""
        lines.append(f"Mean accuracy delta: {delta:+.2f} pp, p-value: {p_value:.4f}{marker}")
    if report.skipped:
        lines.append("")
        lines.append("Skipped")
        lines.append("=" * 60)
        for entry in report.skipped:
            lines.append(f"{entry['file']}: {entry['reason']}")
    return "\n".join(lines) + "\n"
