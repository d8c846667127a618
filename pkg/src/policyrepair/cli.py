"""Command-line client.

Single-policy commands (validate, localize, gen-requests, repair) run against
the in-process core by default, or against a running service when --server is
given; either way the command itself only loads files, delegates, and prints.
Corpus commands (batch, stats, report) operate on the local filesystem.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .errors import PolicyRepairError
from .evaluation import (
    parse_spec,
    serialize_spec,
    spec_to_object,
    validate_goal,
    validation_to_object,
)
from .generation import GenConfig, generate_requests
from .localization import localize, report_to_object
from .policy import corpus_stats, normalize_policy, policy_to_object
from .repair import RepairConfig, RepairMode, outcome_to_object, repair
from .reporting import (
    BatchConfig,
    build_report,
    load_corpus,
    render_report,
    report_to_object as batch_report_to_object,
    run_batch,
)
from .synthesis import Backend, SynthesizerConfig


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_policy(path: str):
    return normalize_policy(Path(path).read_text(encoding="utf-8"))


def _load_spec(path: str):
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _post(server: str, route: str, payload: dict) -> dict:
    response = httpx.post(server.rstrip("/") + route, json=payload, timeout=600.0)
    if response.status_code != 200:
        try:
            body = response.json()
            _fail(f"{body.get('error', response.status_code)}: {body.get('detail', '')}")
        except json.JSONDecodeError:
            _fail(f"server answered HTTP {response.status_code}")
    return response.json()


def _echo_json(obj: dict) -> None:
    click.echo(json.dumps(obj, indent=2))


def _synth_options(fn):
    fn = click.option(
        "--backend",
        type=click.Choice([b.value for b in Backend]),
        default=Backend.RULE_BASED.value,
        show_default=True,
        help="Synthesizer backend.",
    )(fn)
    fn = click.option("--endpoint", default=None, help="Chat-completion endpoint URL.")(fn)
    fn = click.option("--model", "model_name", default=None, help="Remote model name.")(fn)
    fn = click.option(
        "--api-key-env",
        default="POLICYREPAIR_API_KEY",
        show_default=True,
        help="Environment variable holding the API credential.",
    )(fn)
    fn = click.option("--temperature", default=0.2, show_default=True)(fn)
    fn = click.option("--max-output-tokens", default=2048, show_default=True)(fn)
    fn = click.option("--request-timeout", default=60.0, show_default=True)(fn)
    fn = click.option("--retry-limit", default=3, show_default=True)(fn)
    return fn


def _make_synth_config(**kw) -> SynthesizerConfig:
    return SynthesizerConfig(
        backend=Backend(kw["backend"]),
        endpoint=kw["endpoint"],
        model_name=kw["model_name"],
        temperature=kw["temperature"],
        max_output_tokens=kw["max_output_tokens"],
        request_timeout=kw["request_timeout"],
        retry_limit=kw["retry_limit"],
        api_key_env=kw["api_key_env"],
    )


@click.group()
def main() -> None:
    """Access-control policy validation, fault localization, and repair."""


@main.command()
@click.argument("policy_file", type=click.Path(exists=True))
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("--server", default=None, help="Run against a service instead of in-process.")
@click.option("--json", "as_json", is_flag=True, help="Print the raw JSON result.")
def validate(policy_file: str, spec_file: str, server: str | None, as_json: bool) -> None:
    """Classify every request in SPEC_FILE against POLICY_FILE.

    Exits 1 when any request is misclassified."""
    try:
        if server:
            policy = _load_policy(policy_file)
            spec = _load_spec(spec_file)
            payload = _post(
                server,
                "/policies/validate",
                {"policy": policy_to_object(policy), "spec": spec_to_object(spec)},
            )
        else:
            payload = validation_to_object(
                validate_goal(_load_policy(policy_file), _load_spec(spec_file))
            )
    except PolicyRepairError as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    if as_json:
        _echo_json(payload)
    else:
        for item in payload["per_request"]:
            req = item["request"]
            mark = "ok  " if item["correct"] else "FAIL"
            click.echo(
                f"[{mark}] expected={req['expected']:<5} got={item['decision']['verdict']:<12} "
                f"{req['action']} {req['resource']}"
            )
        click.echo(
            f"status={payload['status']} accuracy={payload['accuracy_percent']:.1f}% "
            f"({payload['correct_count']}/{payload['total_count']} correct)"
        )
    if payload["status"] != "Pass":
        sys.exit(1)


@main.command("localize")
@click.argument("policy_file", type=click.Path(exists=True))
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("--server", default=None, help="Run against a service instead of in-process.")
def localize_cmd(policy_file: str, spec_file: str, server: str | None) -> None:
    """Map each misclassified request to the responsible statements."""
    try:
        if server:
            policy = _load_policy(policy_file)
            spec = _load_spec(spec_file)
            payload = _post(
                server,
                "/policies/localize",
                {"policy": policy_to_object(policy), "spec": spec_to_object(spec)},
            )
        else:
            policy = _load_policy(policy_file)
            report = localize(policy, validate_goal(policy, _load_spec(spec_file)))
            payload = report_to_object(report, policy)
    except PolicyRepairError as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    _echo_json(payload)


@main.command("gen-requests")
@click.argument("policy_file", type=click.Path(exists=True))
@click.option("-n", "--size", default=10, show_default=True, help="Request count.")
@click.option("--rho", default=0.0, show_default=True, help="Misclassification fraction.")
@click.option("--seed", default=0, show_default=True)
@click.option("--server", default=None, help="Run against a service instead of in-process.")
@click.option("-o", "--output", type=click.Path(), default=None, help="Write the spec here.")
def gen_requests(
    policy_file: str, size: int, rho: float, seed: int, server: str | None, output: str | None
) -> None:
    """Generate a must-allow/must-deny request suite from POLICY_FILE."""
    try:
        if server:
            policy = _load_policy(policy_file)
            payload = _post(
                server,
                "/policies/generate-requests",
                {"policy": policy_to_object(policy), "n": size, "rho": rho, "seed": seed},
            )
            text = json.dumps(payload, indent=2) + "\n"
        else:
            spec = generate_requests(
                _load_policy(policy_file), GenConfig(n=size, rho=rho, seed=seed)
            )
            text = serialize_spec(spec)
    except PolicyRepairError as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    if output is None:
        click.echo(text, nl=False)
        return
    out_path = Path(output)
    out_path.write_text(text, encoding="utf-8")
    manifest_path = out_path.parent / "manifest.json"
    entries = []
    if manifest_path.exists():
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    entry = {"policy": policy_file, "n": size, "rho": rho, "seed": seed, "suite": out_path.name}
    entries = [e for e in entries if e.get("suite") != out_path.name] + [entry]
    manifest_path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {out_path}")


@main.command("repair")
@click.argument("policy_file", type=click.Path(exists=True))
@click.argument("spec_file", type=click.Path(exists=True))
@click.option(
    "--mode",
    type=click.Choice([m.value for m in RepairMode]),
    default=RepairMode.FL_GUIDED.value,
    show_default=True,
)
@click.option("--max-iterations", default=5, show_default=True)
@click.option("--target-accuracy", default=100.0, show_default=True)
@click.option("--server", default=None, help="Run against a service instead of in-process.")
@click.option("--save-policy", type=click.Path(), default=None, help="Write the best policy here.")
@_synth_options
def repair_cmd(
    policy_file: str,
    spec_file: str,
    mode: str,
    max_iterations: int,
    target_accuracy: float,
    server: str | None,
    save_policy: str | None,
    **synth_kw,
) -> None:
    """Run the iterative repair loop on POLICY_FILE against SPEC_FILE."""
    try:
        if server:
            policy = _load_policy(policy_file)
            spec = _load_spec(spec_file)
            payload = _post(
                server,
                "/policies/repair",
                {
                    "policy": policy_to_object(policy),
                    "spec": spec_to_object(spec),
                    "mode": mode,
                    "max_iterations": max_iterations,
                    "target_accuracy_percent": target_accuracy,
                    "synthesizer": {
                        "backend": synth_kw["backend"],
                        "endpoint": synth_kw["endpoint"],
                        "model_name": synth_kw["model_name"],
                        "temperature": synth_kw["temperature"],
                        "max_output_tokens": synth_kw["max_output_tokens"],
                        "request_timeout": synth_kw["request_timeout"],
                        "retry_limit": synth_kw["retry_limit"],
                        "api_key_env": synth_kw["api_key_env"],
                    },
                },
            )
        else:
            cfg = RepairConfig(
                synthesizer=_make_synth_config(**synth_kw),
                max_iterations=max_iterations,
                mode=RepairMode(mode),
                target_accuracy_percent=target_accuracy,
            )
            outcome = repair(_load_policy(policy_file), _load_spec(spec_file), cfg)
            payload = outcome_to_object(outcome)
    except (PolicyRepairError, ValueError) as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    if save_policy is not None:
        Path(save_policy).write_text(
            json.dumps(payload["best_policy"], indent=2) + "\n", encoding="utf-8"
        )
    _echo_json(payload)


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--sizes", default="10", show_default=True, help="Comma-separated request sizes.")
@click.option("--rho", default=0.2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option(
    "--modes", default="base,fl", show_default=True, help="Comma-separated prompt modes."
)
@click.option("--max-iterations", default=5, show_default=True)
@click.option("--workers", default=1, show_default=True, help="Bounded repair worker pool.")
@click.option("--budget-seconds", default=None, type=float, help="Global wall-clock budget.")
@click.option(
    "-o", "--output-dir", type=click.Path(file_okay=False), required=True,
    help="Where suites, outcomes, and reports land.",
)
@_synth_options
def batch(
    corpus_dir: str,
    sizes: str,
    rho: float,
    seed: int,
    modes: str,
    max_iterations: int,
    workers: int,
    budget_seconds: float | None,
    output_dir: str,
    **synth_kw,
) -> None:
    """Generate or load request suites for every corpus policy and repair them
    across the experiment matrix (policy x size x mode)."""
    try:
        cfg = BatchConfig(
            sizes=tuple(int(s) for s in sizes.split(",") if s),
            rho=rho,
            seed=seed,
            modes=tuple(RepairMode(m.strip()) for m in modes.split(",") if m.strip()),
            synthesizer=_make_synth_config(**synth_kw),
            max_iterations=max_iterations,
            workers=workers,
            wall_clock_budget_seconds=budget_seconds,
        )
        report = run_batch(Path(corpus_dir), cfg, Path(output_dir))
    except (PolicyRepairError, ValueError) as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    click.echo(render_report(report), nl=False)
    click.echo(f"artifacts in {output_dir}")


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Print the raw JSON stats.")
def stats(corpus_dir: str, as_json: bool) -> None:
    """Corpus summary statistics over every parseable policy in CORPUS_DIR."""
    try:
        policies, skipped = load_corpus(Path(corpus_dir))
        result = corpus_stats([p for _, p in policies])
    except PolicyRepairError as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    if as_json:
        from dataclasses import asdict

        _echo_json(asdict(result))
        return
    click.echo(f"Total Policies              {result.total_policies}")
    click.echo(f"Total Statements            {result.total_statements}")
    click.echo(f"Avg. Statements per Policy  {result.avg_statements_per_policy:.2f}")
    click.echo(f"Min Statements per Policy   {result.min_statements_per_policy}")
    click.echo(f"Max Statements per Policy   {result.max_statements_per_policy}")
    click.echo(f"Unique Services             {result.unique_services}")
    click.echo(f"Unique Actions              {result.unique_actions}")
    click.echo(f"Unique Resource Types       {result.unique_resource_types}")
    allow_pct = 100.0 * result.allow_count / result.total_statements
    deny_pct = 100.0 * result.deny_count / result.total_statements
    click.echo(f"Allow (Count / %)           {result.allow_count} ({allow_pct:.1f}%)")
    click.echo(f"Deny (Count / %)            {result.deny_count} ({deny_pct:.1f}%)")
    for entry in skipped:
        click.echo(f"skipped {entry['file']}: {entry['reason']}", err=True)


@main.command()
@click.argument("outcomes_files", type=click.Path(exists=True), nargs=-1, required=True)
@click.option("--json-out", type=click.Path(), default=None, help="Also write report JSON here.")
def report(outcomes_files: tuple[str, ...], json_out: str | None) -> None:
    """Rebuild the aggregate tables from persisted outcomes.jsonl files."""
    records = []
    for path in outcomes_files:
        with open(path, encoding="utf-8") as fh:
            records.extend(json.loads(line) for line in fh if line.strip())
    if not records:
        _fail("no outcome records found")
    built = build_report(records)
    if json_out is not None:
        Path(json_out).write_text(
            json.dumps(batch_report_to_object(built), indent=2) + "\n", encoding="utf-8"
        )
    click.echo(render_report(built), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("policyrepair.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
