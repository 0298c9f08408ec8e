import pytest

from convertible.bounds import (
    IntersectionMatrix,
    bound_for,
    degenerate_bound,
    gen_merge_bound,
    gen_split_bound,
    general_bound,
    merge_bound,
    optimal_partitions,
    optimal_row_maxima,
    split_bound,
)
from convertible.errors import ParameterError, RegimeError
from convertible.framework import ConversionParams, PartitionPair


@pytest.mark.parametrize(
    "params, reads, writes",
    [
        ((6, 5, 13, 12), 18, 5),
        ((13, 12, 6, 5), 40, 12),
        ((5, 4, 7, 6), 3 * 1 + 1 * (4 - 2), 2),
    ],
)
def test_general_bound(params, reads, writes):
    bound = general_bound(ConversionParams(*params))
    assert (bound.reads, bound.writes, bound.total) == (reads, writes, reads + writes)


def test_general_bound_falls_back_to_reading_everything():
    assert general_bound(ConversionParams(6, 5, 15, 12)).reads == 60  # r^F > r^I
    assert general_bound(ConversionParams(9, 3, 9, 4)).reads == 12  # r^F >= k^I


def test_merge_bound():
    assert merge_bound(ConversionParams(7, 5, 12, 10)).total == 6
    assert merge_bound(ConversionParams(7, 5, 12, 10)).reads == 4
    assert merge_bound(ConversionParams(6, 5, 12, 10)).reads == 10
    assert merge_bound(ConversionParams(10, 2, 10, 6)).reads == 6
    with pytest.raises(RegimeError):
        merge_bound(ConversionParams(13, 10, 6, 5))


def test_split_bound():
    bound = split_bound(ConversionParams(13, 10, 6, 5))
    assert (bound.reads, bound.writes) == (6, 2)
    assert split_bound(ConversionParams(11, 10, 7, 5)).total == 14
    with pytest.raises(RegimeError):
        split_bound(ConversionParams(7, 5, 12, 10))


def test_degenerate_bound():
    assert degenerate_bound(ConversionParams(7, 5, 6, 5)).total == 0
    assert degenerate_bound(ConversionParams(6, 5, 8, 5)).reads == 5
    assert degenerate_bound(ConversionParams(6, 5, 8, 5)).writes == 2


def test_generalized_bounds():
    assert gen_split_bound(10, [6, 4], 1) == 5
    assert gen_split_bound(10, [6, 4], 2, r_i=1) == 10
    assert gen_split_bound(4, [2, 2], 3) == 4
    assert gen_merge_bound([3, 5], 2, 2) == [2, 2]
    assert gen_merge_bound([3, 5], 4, 4) == [3, 4]
    assert gen_merge_bound([3, 5], 1, 2) == [3, 5]
    with pytest.raises(ParameterError):
        gen_split_bound(10, [6, 3], 1)


@pytest.mark.parametrize("r_f", [1, 5, 7])
def test_split_into_one_stripe_reads_nothing(r_f):
    assert gen_split_bound(5, [5], r_f) == 0


def test_merge_bound_of_no_stripes_is_empty():
    assert gen_merge_bound([], 1, 1) == []
    with pytest.raises(ParameterError):
        gen_merge_bound([0, 2], 1, 1)


def test_bound_for_matches_regime():
    assert bound_for(ConversionParams(7, 5, 12, 10)) == merge_bound(ConversionParams(7, 5, 12, 10))
    params = ConversionParams(6, 5, 13, 12)
    assert bound_for(params) == general_bound(params)
    assert bound_for(ConversionParams(7, 5, 6, 5)).total == 0


def test_optimal_partitions_merge_side():
    params = ConversionParams(6, 5, 13, 12)
    pair, matrix = optimal_partitions(params)
    assert sorted(matrix.row_maxima, reverse=True) == [5] * 10 + [2] * 2
    assert matrix.objective(params.r_f) == 42
    assert matrix.read_bound(params.k_i, params.r_f) == general_bound(params).reads
    assert pair.initial_sets[0] == (1, 2, 3, 4, 5)


def test_optimal_partitions_split_side():
    params = ConversionParams(13, 12, 6, 5)
    pair, matrix = optimal_partitions(params)
    assert matrix.row_maxima == [5] * 5
    assert matrix.read_bound(params.k_i, params.r_f) == 40
    assert pair.final_sets[0] == (1, 2, 3, 4, 5)


@pytest.mark.parametrize("k_i", range(1, 8))
@pytest.mark.parametrize("k_f", range(1, 8))
def test_partitions_are_valid_and_reach_the_bound(k_i, k_f):
    if k_i == k_f:
        pytest.skip("degenerate")
    for r in (1, 2, 3):
        params = ConversionParams(k_i + 3, k_i, k_f + r, k_f)
        _, matrix = optimal_partitions(params)
        assert matrix.entries.sum(axis=1).tolist() == [k_i] * params.s_i_count
        assert matrix.entries.sum(axis=0).tolist() == [k_f] * params.s_f_count
        assert sorted(matrix.row_maxima, reverse=True) == optimal_row_maxima(params)
        expected = general_bound(params).reads if r < min(k_i, k_f) else params.M
        assert matrix.read_bound(k_i, r) == expected


def test_intersection_matrix_objective():
    matrix = IntersectionMatrix.of(
        PartitionPair(((1, 2), (3, 4), (5, 6)), ((1, 3, 5), (2, 4, 6)))
    )
    assert matrix.row_maxima == [1, 1, 1]
    assert matrix.objective(1) == 0
