import logging
from dataclasses import replace
from math import lcm

import pytest

from convertible.bounds import optimal_partitions
from convertible.codes import MdsCode, is_mds, make_systematic_mds
from convertible.conversions import build_spec, plan_general, plan_merge
from convertible.errors import BudgetError, RegimeError
from convertible.framework import ConversionParams, default_plan
from convertible.galois import GfMatrix
from convertible.oracle import (
    audit_access,
    brute_force_partition_objective,
    verify_mds_exhaustive,
    verify_preservation,
)
from convertible.utils.processing import sweep_parameters


def test_zero_trials_pass_with_a_warning(gf256, caplog):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    with caplog.at_level(logging.WARNING):
        report = verify_preservation(spec, plan_merge(spec), trials=0)
    assert report.passed
    assert report.trials == 0
    assert report.warnings
    assert "zero trials" in caplog.text


def test_tampered_coefficient_is_caught(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    plan = plan_merge(spec)
    first = plan.new_nodes[0]
    (ref, coeff), *rest = first.coeffs
    tampered = replace(first, coeffs=((ref, coeff % 255 + 1), *rest))
    plan = replace(plan, new_nodes=(tampered, *plan.new_nodes[1:]))
    report = verify_preservation(spec, plan, trials=5)
    assert not report.passed
    assert report.mismatch == first.target


def test_exhaustive_mds_check(gf256):
    assert verify_mds_exhaustive(make_systematic_mds(7, 4, gf256, seed=1))


def test_exhaustive_check_rejects_a_non_mds_code(gf256):
    code = MdsCode.from_parity(GfMatrix.from_rows([[1, 0], [1, 1]], gf256))
    assert not verify_mds_exhaustive(code)


def test_exhaustive_check_respects_its_budget(gf256):
    with pytest.raises(BudgetError):
        verify_mds_exhaustive(make_systematic_mds(7, 4, gf256, seed=1), budget=5)


def test_is_mds_agrees_with_exhaustive_decoding(gf16, rng):
    verdicts = []
    for _ in range(50):
        k, r = (int(v) for v in rng.integers(2, 5, size=2))
        parity = GfMatrix(gf16.random_elements(rng, (k, r)), gf16)
        code = MdsCode.from_parity(parity)
        verdicts.append(is_mds(code))
        assert verdicts[-1] == verify_mds_exhaustive(code, seed=3)
    assert any(verdicts) and not all(verdicts)


@pytest.mark.slow
def test_every_built_code_is_mds(gf256):
    seen = set()
    for params in sweep_parameters(max_k=8, max_r=4, max_m=48):
        spec = build_spec(params, gf256)
        for code in (spec.initial_code, spec.final_code):
            if code.n > 12 or code.generator in seen:
                continue
            seen.add(code.generator)
            assert verify_mds_exhaustive(code), (params, code.n, code.k)
    assert seen


def test_audit_reports_savings(gf256):
    spec = build_spec(ConversionParams(6, 5, 13, 12), gf256)
    _, plan = plan_general(spec)
    report = audit_access(spec, plan)
    assert report.verdict == "optimal"
    assert (report.total, report.bound) == (23, 23)
    assert report.default_reads == 60
    assert report.savings == pytest.approx(0.7)


def test_audit_flags_the_default_approach(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    assert audit_access(spec, default_plan(spec)).verdict == "suboptimal"


PARTITION_CASES = [
    (k_i, k_f, r_f)
    for k_i in range(1, 13)
    for k_f in range(1, 13)
    if k_i != k_f and lcm(k_i, k_f) <= 12
    for r_f in (1, 2, 3)
]


@pytest.mark.parametrize("k_i,k_f,r_f", PARTITION_CASES)
def test_constructed_partitions_are_optimal(k_i, k_f, r_f):
    params = ConversionParams(k_i + 2, k_i, k_f + r_f, k_f)
    best, witness = brute_force_partition_objective(params)
    _, matrix = optimal_partitions(params)
    assert matrix.objective(r_f) == best
    assert witness.entries.sum(axis=1).tolist() == [k_i] * params.s_i_count
    assert witness.entries.sum(axis=0).tolist() == [k_f] * params.s_f_count


def test_brute_force_limits():
    with pytest.raises(BudgetError):
        brute_force_partition_objective(ConversionParams(7, 5, 9, 7))
    with pytest.raises(RegimeError):
        brute_force_partition_objective(ConversionParams(6, 4, 7, 4))
