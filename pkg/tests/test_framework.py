from dataclasses import replace

import pytest

from convertible.conversions import build_spec
from convertible.errors import ParameterError, PlanInconsistencyError
from convertible.framework import (
    ConversionParams,
    ConversionPlan,
    NewNode,
    PartitionPair,
    classify,
    default_plan,
    encoding_vector,
    linear_mismatches,
    plan_to_dict,
    report_to_dict,
    access_cost,
)


def test_derived_quantities():
    p = ConversionParams(6, 5, 13, 12)
    assert (p.r_i, p.r_f, p.M, p.s_i_count, p.s_f_count) == (1, 1, 60, 12, 5)
    assert p.regime == "general"
    assert ConversionParams(7, 5, 12, 10).regime == "merge"
    assert ConversionParams(13, 10, 6, 5).regime == "split"
    assert ConversionParams(6, 5, 7, 5).regime == "degenerate"


@pytest.mark.parametrize("args", [(5, 5, 6, 5), (6, 5, 4, 4), (1, 0, 3, 2)])
def test_invalid_parameters(args):
    with pytest.raises(ParameterError):
        ConversionParams(*args)


def test_partition_validation():
    p = ConversionParams(3, 2, 4, 3)
    PartitionPair(((1, 2), (3, 4), (5, 6)), ((1, 2, 5), (3, 4, 6))).validate(p)
    with pytest.raises(ParameterError):
        PartitionPair(((1, 2), (2, 3), (5, 6)), ((1, 2, 5), (3, 4, 6))).validate(p)
    with pytest.raises(ParameterError):
        PartitionPair(((1, 2), (3, 4), (5, 6)), ((1, 2), (3, 4, 5, 6))).validate(p)
    with pytest.raises(ParameterError):
        PartitionPair(((1, 2), (3, 4)), ((1, 2, 3), (4, 5, 6))).validate(p)


def test_default_plan_without_reuse_rewrites_everything(gf256):
    spec = build_spec(ConversionParams(6, 5, 13, 12), gf256)
    plan = default_plan(spec, reuse_systematic=False)
    taxonomy = classify(spec, plan)
    assert (taxonomy.unchanged, taxonomy.retired, taxonomy.new) == (0, 72, 65)
    assert plan.reads == 60
    assert not linear_mismatches(spec, plan)


def test_default_plan_reuses_systematic_nodes(gf256):
    spec = build_spec(ConversionParams(6, 5, 13, 12), gf256)
    plan = default_plan(spec)
    taxonomy = classify(spec, plan)
    assert (taxonomy.unchanged, taxonomy.retired, taxonomy.new) == (60, 12, 5)
    assert taxonomy.unchanged_per_final_stripe == (12,) * 5
    assert access_cost(plan).total == 65
    assert not linear_mismatches(spec, plan)


def test_identical_codes_need_no_access(gf256):
    spec = build_spec(ConversionParams(6, 5, 6, 5), gf256)
    plan = default_plan(spec)
    assert (plan.reads, plan.writes) == (0, 0)
    assert len(plan.unchanged) == 6


def test_empty_plan_is_inconsistent(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    with pytest.raises(PlanInconsistencyError):
        classify(spec, ConversionPlan((), (), (), frozenset()))


def test_new_node_outside_read_set_is_inconsistent(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    plan = default_plan(spec)
    shrunk = replace(plan, read_set=plan.read_set - {(1, 1)})
    with pytest.raises(PlanInconsistencyError):
        classify(spec, shrunk)


def test_tampered_coefficient_is_detected(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    plan = default_plan(spec)
    first = plan.new_nodes[0]
    (ref, c), *rest = first.coeffs
    tampered = NewNode(first.target, ((ref, c ^ 1), *rest))
    bad = replace(plan, new_nodes=(tampered, *plan.new_nodes[1:]))
    assert linear_mismatches(spec, bad) == [first.target]


def test_encoding_vectors_of_systematic_nodes(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    vector = encoding_vector(spec, "initial", (2, 3))
    assert vector.tolist() == [1 if p == 8 else 0 for p in range(1, 11)]
    parity = encoding_vector(spec, "final", (1, 11))
    assert parity.tolist() == spec.final_code.parity.data[:, 0].tolist()


def test_serialized_plan_is_zero_based(gf256):
    spec = build_spec(ConversionParams(7, 5, 12, 10), gf256)
    data = plan_to_dict(default_plan(spec))
    assert data["reads"] == 10
    assert [0, 0] in data["read_set"]
    assert all(0 <= s < 2 and 0 <= j < 7 for s, j in data["read_set"])
    assert {tuple(n["target"]) for n in data["new_nodes"]} == {(0, 10), (0, 11)}


def test_report_dict_drops_missing_verdict():
    report = access_cost(ConversionPlan((), (), (), frozenset({(1, 1)})))
    assert report_to_dict(report)["reads"] == 1
    assert "verdict" not in report_to_dict(report)
