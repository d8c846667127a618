from __future__ import annotations

import math
from fractions import Fraction

import pytest

from policyrepair import (
    Effect,
    GenConfig,
    Verdict,
    evaluate,
    extract_elements,
    generate_requests,
    match_pattern,
    parse_policy,
    universal_allow,
    validate_goal,
)
from policyrepair.errors import InsufficientCombinationsError
from policyrepair.evaluation import serialize_spec
from policyrepair.generation import sample_allowed, sample_denied


def test_extract_elements_concrete_policy():
    policy = parse_policy(
        '{"Statement":[{"Effect":"Allow","Action":["a:x","b:y"],"Resource":["r1","r2"]}]}'
    )
    elements = extract_elements(policy)
    assert elements.actions == ("a:x", "b:y")
    assert elements.resources == ("r1", "r2")
    assert elements.principals == ()
    assert elements.conditions == ()


def test_extract_elements_instantiates_wildcards(figure_policy):
    elements = extract_elements(figure_policy)
    assert "iam:GetAccountSummary" in elements.actions
    assert "ec2:DescribeInstances" in elements.actions
    instantiated = [a for a in elements.actions if a.startswith("s3:")]
    assert len(instantiated) >= 10
    assert all(match_pattern("s3:*", a) for a in instantiated)
    assert all("*" not in a and "?" not in a for a in elements.actions)


def test_extract_elements_deterministic(figure_policy):
    assert extract_elements(figure_policy, seed=3) == extract_elements(figure_policy, seed=3)
    assert extract_elements(figure_policy, seed=3) != extract_elements(figure_policy, seed=4)


def test_sample_allowed_verified_and_unique(figure_policy):
    elements = extract_elements(figure_policy)
    requests = sample_allowed(elements, 12, seed=1)
    assert len(requests) == 12
    assert len({r.key() for r in requests}) == 12
    for r in requests:
        assert r.expected is Effect.ALLOW
        assert evaluate(figure_policy, r).verdict is Verdict.ALLOW


def test_sample_allowed_zero():
    policy = parse_policy('{"Statement":[{"Effect":"Allow","Action":"a:*","Resource":"*"}]}')
    assert sample_allowed(extract_elements(policy), 0, seed=1) == []


def test_sample_denied_verified(figure_policy):
    elements = extract_elements(figure_policy)
    requests = sample_denied(elements, 8, seed=1)
    assert len(requests) == 8
    for r in requests:
        assert r.expected is Effect.DENY
        assert evaluate(figure_policy, r).verdict.is_deny


def test_sample_denied_universal_allow_impossible():
    with pytest.raises(InsufficientCombinationsError):
        sample_denied(extract_elements(universal_allow()), 1, seed=1)


def test_insufficient_allowed_combinations():
    policy = parse_policy('{"Statement":[{"Effect":"Allow","Action":"a:x","Resource":"r"}]}')
    elements = extract_elements(policy)
    assert len(sample_allowed(elements, 1, seed=1)) == 1
    with pytest.raises(InsufficientCombinationsError):
        sample_allowed(elements, 2, seed=1)


@pytest.mark.parametrize("n", [1, 5, 10, 20, 30, 50])
def test_split_law(figure_policy, n):
    spec = generate_requests(figure_policy, GenConfig(n=n, rho=0.0, seed=11))
    assert len(spec.must_allow) == (6 * n) // 10
    assert len(spec.must_deny) == n - (6 * n) // 10


@pytest.mark.parametrize("rho", [0.0, 0.1, 0.2, 0.5])
def test_misclassification_law(figure_policy, rho):
    n = 20
    spec = generate_requests(figure_policy, GenConfig(n=n, rho=rho, seed=5))
    result = validate_goal(figure_policy, spec)
    expected_wrong = math.floor(Fraction(str(rho)) * n)
    assert result.total_count - result.correct_count == expected_wrong


def test_uniqueness_across_lists(figure_policy):
    spec = generate_requests(figure_policy, GenConfig(n=30, rho=0.2, seed=9))
    keys = [r.key() for r in spec.all_requests()]
    assert len(keys) == len(set(keys)) == 30


def test_seeded_determinism_byte_identical(figure_policy):
    cfg = GenConfig(n=20, rho=0.2, seed=42)
    first = serialize_spec(generate_requests(figure_policy, cfg))
    second = serialize_spec(generate_requests(figure_policy, cfg))
    assert first == second
    different = serialize_spec(generate_requests(figure_policy, GenConfig(n=20, rho=0.2, seed=43)))
    assert first != different


def test_rho_zero_passes_validation(figure_policy):
    spec = generate_requests(figure_policy, GenConfig(n=10, rho=0.0, seed=3))
    assert validate_goal(figure_policy, spec).status.value == "Pass"


def test_flipped_requests_differ_in_exactly_one_attribute(figure_policy):
    n, rho, seed = 20, 0.2, 13
    clean = generate_requests(figure_policy, GenConfig(n=n, rho=0.0, seed=seed))
    flipped = generate_requests(figure_policy, GenConfig(n=n, rho=rho, seed=seed))
    clean_by_key = {r.key(): r for r in clean.all_requests()}
    changed = [r for r in flipped.all_requests() if r.key() not in clean_by_key]
    assert len(changed) == 4  # floor(0.2 * 20)
    # Each modified request matches some pre-flip request on all but one of
    # (resource, principal, context); the action never changes.
    pre_flip = list(clean_by_key.values())
    for req in changed:
        partners = [p for p in pre_flip if p.action == req.action]
        assert partners
        diffs = min(
            (p.resource != req.resource)
            + (p.principal != req.principal)
            + (p.context != req.context)
            for p in partners
        )
        assert diffs == 1
