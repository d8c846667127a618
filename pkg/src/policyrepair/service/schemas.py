"""Pydantic request/response models for the HTTP service.

Policies travel as plain JSON objects and are parsed by the core package, so
policy validation lives in exactly one place; these models shape the envelopes
around them.
"""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class AccessRequestModel(BaseModel):
    principal: Optional[str] = None
    action: str
    resource: str
    context: Optional[dict[str, str]] = None
    # Present in responses that echo requests with their must-allow/must-deny
    # label; ignored on input (the list a request sits in decides its label).
    expected: Optional[Literal["Allow", "Deny"]] = None


class RequestSpecModel(BaseModel):
    must_allow: list[AccessRequestModel] = Field(default_factory=list)
    must_deny: list[AccessRequestModel] = Field(default_factory=list)


class NormalizeRequest(BaseModel):
    text: str


class PolicyResponse(BaseModel):
    policy: dict[str, Any]
    fingerprint: str


class EvaluateRequest(BaseModel):
    policy: dict[str, Any]
    request: AccessRequestModel


class DecisionModel(BaseModel):
    verdict: Literal["Allow", "ExplicitDeny", "ImplicitDeny"]
    matched_allow: list[int]
    matched_deny: list[int]


class ValidateRequest(BaseModel):
    policy: dict[str, Any]
    spec: RequestSpecModel


class PerRequestModel(BaseModel):
    request: AccessRequestModel
    decision: DecisionModel
    correct: bool


class ValidationResultModel(BaseModel):
    status: Literal["Pass", "Fail"]
    per_request: list[PerRequestModel]
    correct_count: int
    total_count: int
    accuracy_percent: float
    policy_fingerprint: str


class FaultEntryModel(BaseModel):
    request: AccessRequestModel
    case: Literal["WrongExplicitAllow", "WrongExplicitDeny", "MissingAllow"]
    responsible: list[int]
    responsible_labels: list[str]


class FaultReportModel(BaseModel):
    entries: list[FaultEntryModel]
    policy_fingerprint: str


class GenerateRequestsRequest(BaseModel):
    policy: dict[str, Any]
    n: int = Field(ge=1)
    rho: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0


class PromptRequest(BaseModel):
    policy: dict[str, Any]
    spec: RequestSpecModel
    mode: Literal["base", "fl"] = "fl"
    iteration: int = Field(default=1, ge=1)


class PromptResponse(BaseModel):
    mode: Literal["base", "fl"]
    accuracy_percent: float
    prompt: str


class SynthesizerConfigModel(BaseModel):
    backend: Literal["rule-based", "remote"] = "rule-based"
    endpoint: Optional[str] = None
    model_name: Optional[str] = None
    temperature: float = 0.2
    max_output_tokens: int = 2048
    request_timeout: float = 60.0
    retry_limit: int = 3
    api_key_env: str = "POLICYREPAIR_API_KEY"


class RepairRequest(BaseModel):
    policy: dict[str, Any]
    spec: RequestSpecModel
    mode: Literal["base", "fl"] = "fl"
    max_iterations: int = Field(default=5, ge=1)
    target_accuracy_percent: float = Field(default=100.0, gt=0.0, le=100.0)
    synthesizer: SynthesizerConfigModel = Field(default_factory=SynthesizerConfigModel)


class TraceRecordModel(BaseModel):
    iteration: int
    prompt_sha256: str
    accuracy_percent: Optional[float]
    candidate_sha256: Optional[str]
    synth_seconds: float
    validation_seconds: float
    error: Optional[str] = None


class RepairOutcomeModel(BaseModel):
    status: Literal["CompleteRepair", "PartialRepair", "Failure"]
    best_policy: dict[str, Any]
    best_policy_sha256: str
    best_accuracy_percent: float
    initial_accuracy_percent: float
    iterations_used: int
    trace: list[TraceRecordModel]


class CorpusStatsRequest(BaseModel):
    policies: list[dict[str, Any]] = Field(min_length=1)


class CorpusStatsModel(BaseModel):
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


class TTestRequest(BaseModel):
    a: list[float] = Field(min_length=2)
    b: list[float] = Field(min_length=2)


class TTestResponse(BaseModel):
    t: float
    p_two_tailed: float
    significant_at_05: bool


class SmtlibRequest(BaseModel):
    policy: dict[str, Any]
    request: AccessRequestModel


class SmtlibResponse(BaseModel):
    script: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
