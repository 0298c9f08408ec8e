"""Randomized and exhaustive checks of codes, plans and partitions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from convertible.bounds import (
    CostBound,
    IntersectionMatrix,
    bound_for,
    degenerate_bound,
    gen_merge_bound,
    gen_split_bound,
)
from convertible.codes import MdsCode, decode
from convertible.config.loader import SETTINGS
from convertible.conversions import convert_message, direct_encoding
from convertible.errors import BudgetError, RegimeError, SingularMatrixError
from convertible.framework import (
    AccessReport,
    ConversionParams,
    ConversionPlan,
    ConvertibleCodeSpec,
    GeneralizedSpec,
    NodeRef,
    StripeLayout,
    classify,
    default_plan,
)

logger = logging.getLogger(__name__)


@dataclass
class PreservationReport:
    passed: bool
    trials: int
    mismatch: NodeRef | None = None
    warnings: list[str] = field(default_factory=list)


def verify_preservation(
    spec: StripeLayout,
    plan: ConversionPlan,
    trials: int | None = None,
    seed: int | None = None,
) -> PreservationReport:
    """Convert random messages and compare against direct final encoding.

    All trials run at once as columns of one message matrix.
    """
    trials = SETTINGS["oracle"]["trials"] if trials is None else trials
    if trials == 0:
        logger.warning("preservation check ran zero trials")
        return PreservationReport(True, 0, warnings=["zero trials: nothing was checked"])
    classify(spec, plan)
    rng = np.random.default_rng(SETTINGS["codes"]["seed"] if seed is None else seed)
    message = spec.field.random_elements(rng, (spec.message_length, trials))
    converted, _ = convert_message(spec, plan, message)
    expected = direct_encoding(spec, message)
    for i, (got, want) in enumerate(zip(converted, expected), start=1):
        rows = np.nonzero((got != want).any(axis=1))[0]
        if rows.size:
            mismatch = (i, int(rows[0]) + 1)
            logger.error("conversion diverges from direct encoding at %s", mismatch)
            return PreservationReport(False, trials, mismatch)
    return PreservationReport(True, trials)


def verify_mds_exhaustive(
    code: MdsCode, seed: int | None = None, budget: int | None = None
) -> bool:
    """Decode a random message from every k-subset of nodes."""
    budget = SETTINGS["oracle"]["subset_budget"] if budget is None else budget
    subsets = comb(code.n, code.k)
    if subsets > budget:
        raise BudgetError(f"[{code.n},{code.k}] has {subsets} node subsets (budget {budget})")
    rng = np.random.default_rng(SETTINGS["codes"]["seed"] if seed is None else seed)
    message = code.field.random_elements(rng, (code.k, 2))
    codeword = code.encode(message)
    for nodes in combinations(range(1, code.n + 1), code.k):
        try:
            recovered = decode(code, {j: codeword[j - 1] for j in nodes})
        except SingularMatrixError:
            logger.info("nodes %s of [%d,%d] are not an information set", nodes, code.n, code.k)
            return False
        if not np.array_equal(recovered, message):
            return False
    return True


def _layout_bound(spec: StripeLayout) -> CostBound:
    if isinstance(spec, ConvertibleCodeSpec):
        return bound_for(spec.params)
    if isinstance(spec, GeneralizedSpec):
        if len(spec.initial) == len(spec.final) == 1:
            k = spec.message_length
            return degenerate_bound(ConversionParams(k + spec.r_i, k, k + spec.r_f, k))
        if spec.kind == "generalized_split":
            return CostBound(
                gen_split_bound(spec.message_length, spec.final_sizes, spec.r_f, spec.r_i),
                len(spec.final) * spec.r_f,
            )
        sizes = spec.initial_sizes
        return CostBound(sum(gen_merge_bound(sizes, spec.r_i, spec.r_f)), spec.r_f)
    raise RegimeError(f"no bound known for {type(spec).__name__}")


def audit_access(spec: StripeLayout, plan: ConversionPlan) -> AccessReport:
    """Compare a plan's cost with the bound of its regime and the default approach."""
    classify(spec, plan)
    bound = _layout_bound(spec)
    baseline = default_plan(spec)
    report = AccessReport(
        reads=plan.reads,
        writes=plan.writes,
        total=plan.cost,
        bound=bound.total,
        bound_reads=bound.reads,
        default_total=baseline.cost,
        default_reads=baseline.reads,
        savings=1 - plan.reads / baseline.reads if baseline.reads else 0.0,
    )
    if plan.cost < bound.total:
        report.verdict = "below-bound"
        logger.error("plan costs %d, below the lower bound %d", plan.cost, bound.total)
    elif plan.cost == bound.total:
        report.verdict = "optimal"
    else:
        report.verdict = "suboptimal"
    return report


def _compositions(total: int, caps: list[int]):
    """Vectors c with sum(c) == total and 0 <= c[i] <= caps[i]."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first, *rest)


def brute_force_partition_objective(
    params: ConversionParams,
) -> tuple[int, IntersectionMatrix]:
    """Best Σ max(M*_i - r^F, 0) over every feasible intersection matrix.

    Intersection matrices are exactly the nonnegative integer matrices with
    row sums k^I and column sums k^F.
    """
    p = params
    if p.k_i == p.k_f:
        raise RegimeError(f"{p} has k^I = k^F")
    limit = SETTINGS["oracle"]["partition_max_m"]
    if p.M > limit:
        raise BudgetError(f"M={p.M} exceeds the brute-force limit {limit}")

    best, witness = -1, None

    def search(columns: list[tuple[int, ...]], remaining: list[int]):
        nonlocal best, witness
        if len(columns) == p.s_f_count:
            if any(remaining):
                return
            matrix = IntersectionMatrix(np.array(columns, dtype=np.int64).T)
            score = matrix.objective(p.r_f)
            if score > best:
                best, witness = score, matrix
            return
        for column in _compositions(p.k_f, remaining):
            search(columns + [column], [r - c for r, c in zip(remaining, column)])

    search([], [p.k_i] * p.s_i_count)
    return best, witness
