"""Verifiable repair engine for cloud access-control policies."""

__version__ = "0.1.0"

from .evaluation import (
    AccessRequest,
    Decision,
    RequestSpec,
    ValidationResult,
    Verdict,
    evaluate,
    match_pattern,
    statement_matches,
    validate_goal,
)
from .generation import GenConfig, PolicyElements, extract_elements, generate_requests
from .localization import FaultCase, FaultEntry, FaultReport, localize, universal_allow
from .policy import (
    ConditionClause,
    CorpusStats,
    Effect,
    Policy,
    Statement,
    corpus_stats,
    normalize_policy,
    parse_policy,
    policy_fingerprint,
    serialize_policy,
)
from .prompts import PromptContext, build_base_prompt, build_fl_prompt
from .repair import RepairConfig, RepairMode, RepairOutcome, RepairStatus, repair
from .reporting import BatchConfig, bin_outcomes, run_batch, welch_ttest
from .smtlib import encode_smtlib
from .synthesis import (
    Backend,
    SynthesisResult,
    SynthesizerConfig,
    extract_policy_from_response,
    synthesize_remote,
    synthesize_rule_based,
)

__all__ = [
    "AccessRequest",
    "Backend",
    "BatchConfig",
    "ConditionClause",
    "CorpusStats",
    "Decision",
    "Effect",
    "FaultCase",
    "FaultEntry",
    "FaultReport",
    "GenConfig",
    "Policy",
    "PolicyElements",
    "PromptContext",
    "RepairConfig",
    "RepairMode",
    "RepairOutcome",
    "RepairStatus",
    "RequestSpec",
    "Statement",
    "SynthesisResult",
    "SynthesizerConfig",
    "ValidationResult",
    "Verdict",
    "bin_outcomes",
    "build_base_prompt",
    "build_fl_prompt",
    "corpus_stats",
    "encode_smtlib",
    "evaluate",
    "extract_elements",
    "extract_policy_from_response",
    "generate_requests",
    "localize",
    "match_pattern",
    "normalize_policy",
    "parse_policy",
    "policy_fingerprint",
    "repair",
    "run_batch",
    "serialize_policy",
    "statement_matches",
    "synthesize_remote",
    "synthesize_rule_based",
    "universal_allow",
    "validate_goal",
    "welch_ttest",
]
