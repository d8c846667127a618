"""FastAPI service wrapping the core package.

Every endpoint is a thin adapter: decode the envelope, call the core
function, encode the result. Core exceptions map to HTTP 400/422 with the
exception class name in the body.
"""
from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PolicyParseError, PolicyRepairError
from ..evaluation import (
    AccessRequest,
    RequestSpec,
    evaluate,
    normalize_context,
    spec_to_object,
    validate_goal,
    validation_to_object,
)
from ..generation import GenConfig, generate_requests
from ..localization import localize, report_to_object
from ..policy import (
    Effect,
    Policy,
    corpus_stats,
    normalize_policy,
    policy_fingerprint,
    policy_from_object,
    policy_to_object,
)
from ..prompts import PromptContext, build_base_prompt, build_fl_prompt
from ..repair import RepairConfig, RepairMode, outcome_to_object, repair
from ..reporting import welch_ttest
from ..smtlib import encode_smtlib
from ..synthesis import Backend, SynthesizerConfig
from . import schemas

app = FastAPI(
    title="policyrepair",
    version=__version__,
    description=(
        "Access-control policy evaluation, fault localization, request "
        "generation, and iterative repair."
    ),
)


@app.exception_handler(PolicyRepairError)
async def _domain_error(request: Request, exc: PolicyRepairError) -> JSONResponse:
    status = 422 if isinstance(exc, PolicyParseError) else 400
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


def _policy(obj: dict) -> Policy:
    return policy_from_object(obj)


def _request(model: schemas.AccessRequestModel, expected: Effect) -> AccessRequest:
    return AccessRequest(
        action=model.action,
        resource=model.resource,
        expected=expected,
        principal=model.principal,
        context=normalize_context(model.context),
    )


def _spec(model: schemas.RequestSpecModel) -> RequestSpec:
    return RequestSpec(
        must_allow=tuple(_request(r, Effect.ALLOW) for r in model.must_allow),
        must_deny=tuple(_request(r, Effect.DENY) for r in model.must_deny),
    )


def _synth_config(model: schemas.SynthesizerConfigModel) -> SynthesizerConfig:
    return SynthesizerConfig(
        backend=Backend(model.backend),
        endpoint=model.endpoint,
        model_name=model.model_name,
        temperature=model.temperature,
        max_output_tokens=model.max_output_tokens,
        request_timeout=model.request_timeout,
        retry_limit=model.retry_limit,
        api_key_env=model.api_key_env,
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post(
    "/policies/normalize",
    response_model=schemas.PolicyResponse,
    responses={422: {"model": schemas.ErrorResponse}},
)
def normalize(body: schemas.NormalizeRequest) -> schemas.PolicyResponse:
    policy = normalize_policy(body.text)
    return schemas.PolicyResponse(
        policy=policy_to_object(policy), fingerprint=policy_fingerprint(policy)
    )


@app.post("/policies/evaluate", response_model=schemas.DecisionModel)
def evaluate_endpoint(body: schemas.EvaluateRequest) -> schemas.DecisionModel:
    decision = evaluate(_policy(body.policy), _request(body.request, Effect.ALLOW))
    return schemas.DecisionModel(
        verdict=decision.verdict.value,
        matched_allow=list(decision.matched_allow),
        matched_deny=list(decision.matched_deny),
    )


@app.post("/policies/validate", response_model=schemas.ValidationResultModel)
def validate(body: schemas.ValidateRequest) -> dict:
    result = validate_goal(_policy(body.policy), _spec(body.spec))
    return validation_to_object(result)


@app.post("/policies/localize", response_model=schemas.FaultReportModel)
def localize_endpoint(body: schemas.ValidateRequest) -> dict:
    policy = _policy(body.policy)
    report = localize(policy, validate_goal(policy, _spec(body.spec)))
    return report_to_object(report, policy)


@app.post("/policies/generate-requests", response_model=schemas.RequestSpecModel)
def generate(body: schemas.GenerateRequestsRequest) -> dict:
    spec = generate_requests(
        _policy(body.policy), GenConfig(n=body.n, rho=body.rho, seed=body.seed)
    )
    return spec_to_object(spec)


@app.post("/prompts", response_model=schemas.PromptResponse)
def prompt(body: schemas.PromptRequest) -> schemas.PromptResponse:
    policy = _policy(body.policy)
    spec = _spec(body.spec)
    validation = validate_goal(policy, spec)
    ctx = PromptContext(
        policy=policy,
        spec=spec,
        iteration=body.iteration,
        accuracy_percent=validation.accuracy_percent,
        report=localize(policy, validation) if body.mode == "fl" else None,
    )
    text = build_fl_prompt(ctx) if body.mode == "fl" else build_base_prompt(ctx)
    return schemas.PromptResponse(
        mode=body.mode, accuracy_percent=validation.accuracy_percent, prompt=text
    )


@app.post("/policies/repair", response_model=schemas.RepairOutcomeModel)
def repair_endpoint(body: schemas.RepairRequest) -> dict:
    cfg = RepairConfig(
        synthesizer=_synth_config(body.synthesizer),
        max_iterations=body.max_iterations,
        mode=RepairMode(body.mode),
        target_accuracy_percent=body.target_accuracy_percent,
    )
    outcome = repair(_policy(body.policy), _spec(body.spec), cfg)
    return outcome_to_object(outcome)


@app.post("/corpus/stats", response_model=schemas.CorpusStatsModel)
def stats(body: schemas.CorpusStatsRequest) -> dict:
    policies = [policy_from_object(obj) for obj in body.policies]
    return asdict(corpus_stats(policies))


@app.post("/stats/ttest", response_model=schemas.TTestResponse)
def ttest(body: schemas.TTestRequest) -> schemas.TTestResponse:
    t_stat, p_value = welch_ttest(body.a, body.b)
    return schemas.TTestResponse(
        t=t_stat, p_two_tailed=p_value, significant_at_05=p_value <= 0.05
    )


@app.post("/policies/smtlib", response_model=schemas.SmtlibResponse)
def smtlib(body: schemas.SmtlibRequest) -> schemas.SmtlibResponse:
    script = encode_smtlib(_policy(body.policy), _request(body.request, Effect.ALLOW))
    return schemas.SmtlibResponse(script=script)
