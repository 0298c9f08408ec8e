"""Code construction and access-optimal conversion procedures.

Every procedure reduces to one per-stripe rule: an initial stripe either
hands its systematic nodes to the final stripes that need them, or (when
cheaper) reads r^F of its parities plus the systematic nodes that fall
outside its largest final piece, and cancels the latter's interference
from the parities. New nodes are then a single matrix product over the
read nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from convertible.bounds import IntersectionMatrix, optimal_partitions, optimal_row_maxima
from convertible.codes import MdsCode, is_mds, make_power_code, make_systematic_mds, shorten
from convertible.config.loader import SETTINGS
from convertible.errors import (
    ParameterError,
    PayloadCorruptionError,
    PlanInconsistencyError,
    RegimeError,
    SearchExhaustedError,
)
from convertible.framework import (
    ConversionParams,
    ConversionPlan,
    ConvertibleCodeSpec,
    GeneralizedSpec,
    NewNode,
    NodeRef,
    PartitionPair,
    Stripe,
    StripeLayout,
    default_plan,
    make_plan,
    node_grid,
    reuse_coinciding_nodes,
)
from convertible.galois import FieldSpec, default_field, dot, inv

logger = logging.getLogger(__name__)


# ── Code construction ─────────────────────────────────────────────────────

@dataclass(frozen=True)
class MergeConstruction:
    """Evaluation points of a merge-compatible code pair.

    The initial code's parity t is sum_j m_j * points[j]^t. Slot b of the final
    code evaluates at multipliers[b] * points[j], so its parity t equals
    multipliers[b]^t times the initial parity t of the stripe in that slot.
    """

    points: tuple[int, ...]
    multipliers: tuple[int, ...]
    slot_sizes: tuple[int, ...]

    def final_points(self, f: FieldSpec) -> list[int]:
        return [
            int(f.mul_array(lam, x))
            for lam, size in zip(self.multipliers, self.slot_sizes)
            for x in self.points[:size]
        ]


def search_merge_codes(
    k: int,
    r_i: int,
    slot_sizes: Sequence[int],
    r_f: int,
    f: FieldSpec,
    seed: int | None = None,
) -> tuple[MdsCode, MdsCode, MergeConstruction]:
    """Seeded greedy search for an MDS power-code pair supporting merges.

    Returns the [k + r_i, k] initial code and the [sum(slot_sizes) + r_f,
    sum(slot_sizes)] final code. Raises SearchExhaustedError when the field
    is too small or the draw budget runs out.
    """
    if not slot_sizes or max(slot_sizes) > k or min(slot_sizes) < 1:
        raise ParameterError(f"slot sizes {list(slot_sizes)} must lie in 1..{k}")
    if sum(slot_sizes) > f.order - 1:
        raise SearchExhaustedError(
            f"GF(2^{f.w}) has too few nonzero elements for {sum(slot_sizes)} evaluation points"
        )
    seed = SETTINGS["codes"]["seed"] if seed is None else seed
    budget = SETTINGS["codes"]["merge_search_budget"]
    rng = np.random.default_rng(seed)
    draws = 0

    def draw() -> int:
        nonlocal draws
        draws += 1
        if draws > budget:
            raise SearchExhaustedError(
                f"no MDS merge pair for k={k} slots={list(slot_sizes)} in GF(2^{f.w}) "
                f"within {budget} draws"
            )
        return int(f.random_elements(rng, None, nonzero=True))

    while True:
        points: list[int] = []
        while len(points) < k:
            x = draw()
            if x not in points and is_mds(make_power_code(points + [x], r_i, f)):
                points.append(x)
        final_points = points[: slot_sizes[0]]
        if not is_mds(make_power_code(final_points, r_f, f)):
            continue
        multipliers = [1]
        for size in slot_sizes[1:]:
            while True:
                lam = draw()
                fresh = f.mul_array(lam, np.array(points[:size])).tolist()
                if set(fresh) & set(final_points):
                    continue
                if is_mds(make_power_code(final_points + fresh, r_f, f)):
                    final_points += fresh
                    multipliers.append(lam)
                    break
        construction = MergeConstruction(tuple(points), tuple(multipliers), tuple(slot_sizes))
        logger.debug("merge pair found in GF(2^%d) after %d draws", f.w, draws)
        return (
            make_power_code(points, r_i, f),
            make_power_code(final_points, r_f, f),
            construction,
        )


def _widened(f: FieldSpec) -> FieldSpec | None:
    bits = SETTINGS["field"]["widen_to_bits"]
    return None if bits <= f.w else FieldSpec.from_bits(bits)


def _with_widening(build: Callable[[FieldSpec], object], f: FieldSpec, what: str):
    try:
        return build(f)
    except SearchExhaustedError as exc:
        wide = _widened(f)
        if wide is None:
            raise
        logger.warning("%s: %s; widening to GF(2^%d)", what, exc, wide.w)
        return build(wide)


def _build_codes(p: ConversionParams, f: FieldSpec, seed: int | None):
    if p.k_i == p.k_f:
        parent = make_systematic_mds(p.k_i + max(p.r_i, p.r_f), p.k_i, f, seed)
        initial = MdsCode.from_parity(parent.parity.submatrix(cols=range(p.r_i)))
        final = MdsCode.from_parity(parent.parity.submatrix(cols=range(p.r_f)))
        return initial, final, PartitionPair.contiguous(p)

    partitions, _ = optimal_partitions(p)
    if p.k_i > p.k_f:
        initial = make_systematic_mds(p.n_i, p.k_i, f, seed)
        if p.r_f <= p.r_i:
            projected = initial.parity.submatrix(rows=range(p.k_f), cols=range(p.r_f))
            final = MdsCode.from_parity(projected)
        else:
            final = make_systematic_mds(p.n_f, p.k_f, f, seed)
        return initial, final, partitions

    whole, rest = divmod(p.k_f, p.k_i)
    slots = [p.k_i] * whole + ([rest] if rest else [])
    initial, final, _ = search_merge_codes(p.k_i, p.r_i, slots, p.r_f, f, seed)
    return initial, final, partitions


def build_spec(
    params: ConversionParams, field: FieldSpec | None = None, seed: int | None = None
) -> ConvertibleCodeSpec:
    """Codes and optimal partitions for the parameters.

    The field widens (GF(2^8) -> GF(2^16) by default) when no construction
    exists within the search budget.
    """
    f = field or default_field()

    def build(fld: FieldSpec) -> ConvertibleCodeSpec:
        initial, final, partitions = _build_codes(params, fld, seed)
        return ConvertibleCodeSpec(params, partitions, initial, final, fld)

    spec = _with_widening(build, f, f"codes for {params}")
    logger.info("built %s spec for %s over GF(2^%d)", params.regime, params, spec.field.w)
    return spec


# ── Planning ──────────────────────────────────────────────────────────────

Contribution = dict[NodeRef, dict[NodeRef, int]]


def _systematic_option(i: int, demand: Mapping[NodeRef, np.ndarray]) -> Contribution:
    return {
        target: {(i, l + 1): int(c) for l, c in enumerate(vector) if c}
        for target, vector in demand.items()
    }


def _proportional_parity(
    code: MdsCode, rows: Sequence[int], values: np.ndarray, f: FieldSpec
) -> tuple[int, int] | None:
    """(parity column, alpha) with alpha * P[rows, u] == values, if any."""
    parity = code.parity.data
    for u in range(code.r):
        column = parity[list(rows), u]
        if column[0] == 0 or values[0] == 0:
            continue
        alpha = int(f.mul_array(values[0], inv(int(column[0]), f)))
        if np.array_equal(f.mul_array(alpha, column), values):
            return u, alpha
    return None


def _parity_option(
    i: int,
    stripe: Stripe,
    final: Sequence[Stripe],
    demand: Mapping[NodeRef, np.ndarray],
    f: FieldSpec,
) -> Contribution | None:
    final_sets = [set(fs.positions) for fs in final]
    overlaps = [[l for l, p in enumerate(stripe.positions) if p in fs] for fs in final_sets]
    anchor = max(range(len(final)), key=lambda j: (len(overlaps[j]), -j))
    inside = overlaps[anchor]
    if not inside:
        return None
    outside = [l for l in range(stripe.k) if l not in set(inside)]
    parity = stripe.code.parity.data
    contribution: Contribution = {}
    for target, vector in demand.items():
        if target[0] != anchor + 1:
            contribution[target] = {(i, l + 1): int(c) for l, c in enumerate(vector) if c}
            continue
        match = _proportional_parity(stripe.code, inside, vector[inside], f)
        if match is None:
            return None
        u, alpha = match
        coeffs = {(i, stripe.k + u + 1): alpha}
        for l in outside:
            coeffs[(i, l + 1)] = int(f.mul_array(alpha, parity[l, u]))
        contribution[target] = coeffs
    return contribution


def _reads(contribution: Contribution) -> set[NodeRef]:
    return {ref for coeffs in contribution.values() for ref, c in coeffs.items() if c}


def plan_layout(layout: StripeLayout, label: str = "") -> ConversionPlan:
    """Cheapest per-stripe plan for a layout; coinciding nodes are kept unchanged."""
    f = layout.field
    M = layout.message_length
    initial, final = layout.initial_stripes, layout.final_stripes
    unchanged = reuse_coinciding_nodes(layout)
    kept = set(unchanged.values())
    vectors = {j: s.encoding_vectors(M) for j, s in enumerate(final, start=1)}
    targets = [ref for ref in node_grid(final) if ref not in kept]

    combined: dict[NodeRef, dict[NodeRef, int]] = {t: {} for t in targets}
    for i, stripe in enumerate(initial, start=1):
        columns = [p - 1 for p in stripe.positions]
        demand = {}
        for target in targets:
            vector = vectors[target[0]][target[1] - 1][columns]
            if vector.any():
                demand[target] = vector
        if not demand:
            continue
        option = _systematic_option(i, demand)
        alternative = _parity_option(i, stripe, final, demand, f)
        if alternative is not None and len(_reads(alternative)) < len(_reads(option)):
            option = alternative
        for target, coeffs in option.items():
            merged = combined[target]
            for ref, c in coeffs.items():
                merged[ref] = merged.get(ref, 0) ^ c

    new_nodes = [
        NewNode(target, tuple(sorted((ref, c) for ref, c in coeffs.items() if c)))
        for target, coeffs in combined.items()
    ]
    plan = make_plan(initial, final, unchanged, new_nodes, label=label)
    logger.debug("plan %s: %d reads, %d writes", label or "layout", plan.reads, plan.writes)
    return plan


def plan_split(spec: ConvertibleCodeSpec) -> ConversionPlan:
    """Split one stripe into ς = k^I/k^F stripes.

    The first final stripe is rebuilt from r^F initial parities after
    cancelling the other stripes' data. With r^F > r^I the default
    approach applies.
    """
    p = spec.params
    if p.regime != "split":
        raise RegimeError(f"{p} is not a split")
    if p.r_f > p.r_i:
        return default_plan(spec)
    return plan_layout(spec, label="split")


def plan_merge(spec: ConvertibleCodeSpec) -> ConversionPlan:
    """Merge ς = k^F/k^I stripes; each contributes r^F scaled parities."""
    p = spec.params
    if p.regime != "merge":
        raise RegimeError(f"{p} is not a merge")
    if p.r_f > p.r_i:
        return default_plan(spec)
    return plan_layout(spec, label="merge")


# ── General regime ────────────────────────────────────────────────────────

def intermediate_sizes(params: ConversionParams) -> list[int]:
    """Piece sizes each leftover initial stripe is cut into."""
    p = params
    if p.k_i < p.k_f:
        a = p.k_f % p.k_i
        if a == 0:
            return []
        pieces = -(-p.k_i // a)
        return [a] * (pieces - 1) + [p.k_i - a * (pieces - 1)]
    whole, tail = divmod(p.k_i, p.k_f)
    return [p.k_f] * whole + ([tail] if tail else [])


@dataclass(frozen=True)
class GroupMember:
    initial_stripe: int
    positions: int
    mode: str  # "parity" | "systematic" | "kept"


@dataclass(frozen=True)
class SubPlan:
    """The part of a conversion that produces one final stripe."""

    final_stripe: int
    label: str  # "keep" | "split" | "merge" | "assemble"
    members: tuple[int, ...]
    reads: tuple[NodeRef, ...]


@dataclass(frozen=True)
class GeneralPlanTree:
    """How the conversion decomposes: which pieces feed which final stripe.

    `splits[i]` lists the piece sizes initial stripe i + 1 is cut into, one
    per final stripe it feeds. `subplans[j]` names the merge, split or
    assembly producing final stripe j + 1 and the reads charged to it.
    """

    params: ConversionParams
    phases: tuple[str, ...]
    groups: tuple[tuple[GroupMember, ...], ...]
    piece_sizes: tuple[int, ...]
    plan: ConversionPlan
    stripe_reads: tuple[int, ...] = field(default=())
    splits: tuple[tuple[int, ...], ...] = field(default=())
    subplans: tuple[SubPlan, ...] = field(default=())


def _phases(params: ConversionParams, plan: ConversionPlan) -> tuple[str, ...]:
    if plan.label == "default":
        return ("default",)
    if params.regime == "degenerate":
        return ("keep",) if not plan.new_nodes else ("keep", "extend")
    if params.k_i < params.k_f:
        return ("merge",) if params.regime == "merge" else ("split", "merge")
    return ("split",) if params.regime == "split" else ("split", "assemble")


def _shared(spec: ConvertibleCodeSpec) -> tuple[list[list[int]], list[int]]:
    """Intersection rows and, per initial stripe, the final stripe with the largest overlap."""
    finals = [set(fs) for fs in spec.partitions.final_sets]
    shared = [[len(set(s) & fs) for fs in finals] for s in spec.partitions.initial_sets]
    anchors = [max(range(len(finals)), key=lambda j: (row[j], -j)) for row in shared]
    return shared, anchors


def _groups(spec: ConvertibleCodeSpec, plan: ConversionPlan):
    k = spec.initial_code.k
    parity_stripes = {ref[0] for ref in plan.read_set if ref[1] > k}
    kept = {(src[0], dst[0]) for src, dst in plan.unchanged if src[1] > k}
    shared, anchors = _shared(spec)
    groups = []
    for j in range(len(spec.partitions.final_sets)):
        members = []
        for i, row in enumerate(shared):
            if not row[j]:
                continue
            if (i + 1, j + 1) in kept:
                mode = "kept"
            elif i + 1 in parity_stripes and anchors[i] == j:
                mode = "parity"
            else:
                mode = "systematic"
            members.append(GroupMember(i + 1, row[j], mode))
        groups.append(tuple(members))
    return tuple(groups)


def _subplans(spec: ConvertibleCodeSpec, plan: ConversionPlan, groups) -> tuple[SubPlan, ...]:
    """Charge every read to the final stripe it serves.

    A data read serves the final stripe holding its message position; a
    parity read serves the stripe's anchor.
    """
    k = spec.initial_code.k
    _, anchors = _shared(spec)
    owner = {pos: j for j, fs in enumerate(spec.partitions.final_sets) for pos in fs}
    charged: list[list[NodeRef]] = [[] for _ in groups]
    for stripe, node in sorted(plan.read_set):
        if node <= k:
            j = owner[spec.partitions.initial_sets[stripe - 1][node - 1]]
        else:
            j = anchors[stripe - 1]
        charged[j].append((stripe, node))
    subplans = []
    for j, members in enumerate(groups):
        if len(members) == 1:
            label = "keep" if members[0].positions == k else "split"
        else:
            label = "assemble" if k > spec.params.k_f else "merge"
        subplans.append(
            SubPlan(j + 1, label, tuple(m.initial_stripe for m in members), tuple(charged[j]))
        )
    return tuple(subplans)


def plan_general(
    spec: ConvertibleCodeSpec, allow_arbitrary_partitions: bool = False
) -> tuple[GeneralPlanTree, ConversionPlan]:
    """Plan any (n^I, k^I; n^F, k^F) conversion.

    The partitions of `spec` must reach the optimal objective unless
    `allow_arbitrary_partitions` is set.
    """
    p = spec.params
    if p.k_i != p.k_f and not allow_arbitrary_partitions:
        achieved = IntersectionMatrix.of(spec.partitions).objective(p.r_f)
        best = sum(max(m - p.r_f, 0) for m in optimal_row_maxima(p))
        if achieved < best:
            raise PlanInconsistencyError(
                f"partitions of {p} reach objective {achieved}, optimal is {best}"
            )
    if p.regime == "split":
        plan = plan_split(spec)
    elif p.regime == "merge":
        plan = plan_merge(spec)
    elif p.r_f > p.r_i and p.regime == "general":
        plan = default_plan(spec)
    else:
        plan = plan_layout(spec, label=p.regime)
    per_stripe = [0] * p.s_i_count
    for stripe, _ in plan.read_set:
        per_stripe[stripe - 1] += 1
    shared, _ = _shared(spec)
    groups = _groups(spec, plan)
    tree = GeneralPlanTree(
        params=p,
        phases=_phases(p, plan),
        groups=groups,
        piece_sizes=tuple(intermediate_sizes(p)) if p.k_i != p.k_f else (),
        plan=plan,
        stripe_reads=tuple(per_stripe),
        splits=tuple(tuple(c for c in row if c) for row in shared),
        subplans=_subplans(spec, plan, groups),
    )
    logger.info("planned %s: phases %s, %d reads", p, "/".join(tree.phases), plan.reads)
    return tree, plan


def tree_to_dict(tree: GeneralPlanTree) -> dict:
    return {
        "params": [tree.params.n_i, tree.params.k_i, tree.params.n_f, tree.params.k_f],
        "regime": tree.params.regime,
        "phases": list(tree.phases),
        "piece_sizes": list(tree.piece_sizes),
        "stripe_reads": list(tree.stripe_reads),
        "groups": [
            [
                {"initial_stripe": m.initial_stripe - 1, "positions": m.positions, "mode": m.mode}
                for m in members
            ]
            for members in tree.groups
        ],
        "splits": [list(sizes) for sizes in tree.splits],
        "subplans": [
            {
                "final_stripe": s.final_stripe - 1,
                "label": s.label,
                "members": [i - 1 for i in s.members],
                "reads": [[stripe - 1, node - 1] for stripe, node in s.reads],
            }
            for s in tree.subplans
        ],
    }


# ── Generalized split and merge ───────────────────────────────────────────

def _contiguous(sizes: Sequence[int]) -> list[tuple[int, ...]]:
    out, start = [], 1
    for size in sizes:
        out.append(tuple(range(start, start + size)))
        start += size
    return out


def _shortened_to(code: MdsCode, k: int) -> MdsCode:
    return code if k == code.k else shorten(code, range(k + 1, code.k + 1))


def generalized_split_spec(
    initial_code: MdsCode, final_sizes: Sequence[int], n_f: int, seed: int | None = None
) -> GeneralizedSpec:
    """One stripe split into stripes of the given sizes.

    The final code is built for the largest piece; the others use its
    shortenings.
    """
    sizes = list(final_sizes)
    if sum(sizes) != initial_code.k or any(s < 1 for s in sizes):
        raise ParameterError(f"sizes {sizes} do not partition k^I={initial_code.k}")
    largest = max(sizes)
    r_f = n_f - largest
    if r_f < 1:
        raise ParameterError(f"n^F={n_f} leaves no parity for a stripe of size {largest}")
    f = initial_code.field
    positions = _contiguous(sizes)
    anchor = sizes.index(largest)
    if r_f <= initial_code.r:
        rows = [p - 1 for p in positions[anchor]]
        parent = MdsCode.from_parity(initial_code.parity.submatrix(rows=rows, cols=range(r_f)))
    else:
        parent = make_systematic_mds(n_f, largest, f, seed)
    final = tuple(Stripe(pos, _shortened_to(parent, len(pos))) for pos in positions)
    initial = (Stripe(tuple(range(1, initial_code.k + 1)), initial_code),)
    return GeneralizedSpec("generalized_split", initial, final, f, initial_code.r, r_f)


def plan_generalized_split(
    initial_code: MdsCode, final_sizes: Sequence[int], n_f: int, seed: int | None = None
) -> tuple[GeneralizedSpec, ConversionPlan]:
    spec = generalized_split_spec(initial_code, final_sizes, n_f, seed)
    return spec, plan_layout(spec, label="generalized_split")


def generalized_merge_spec(
    initial_sizes: Sequence[int],
    n_i: int,
    n_f: int,
    field: FieldSpec | None = None,
    seed: int | None = None,
) -> GeneralizedSpec:
    """Stripes of unequal sizes, each a shortening of one [n^I, k*] code, merged into one.

    Stripe i keeps rows 1..k_i of the parent code.
    """
    sizes = list(initial_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ParameterError(f"invalid initial sizes {sizes}")
    largest, total = max(sizes), sum(sizes)
    r_i, r_f = n_i - largest, n_f - total
    if r_i < 1 or r_f < 1:
        raise ParameterError(f"n^I={n_i}, n^F={n_f} leave no parity for sizes {sizes}")

    def build(f: FieldSpec) -> GeneralizedSpec:
        parent, final_code, _ = search_merge_codes(largest, r_i, sizes, r_f, f, seed)
        initial = tuple(
            Stripe(pos, _shortened_to(parent, len(pos))) for pos in _contiguous(sizes)
        )
        final = (Stripe(tuple(range(1, total + 1)), final_code),)
        return GeneralizedSpec("generalized_merge", initial, final, f, r_i, r_f)

    return _with_widening(build, field or default_field(), f"merge of sizes {sizes}")


def plan_generalized_merge(
    initial_sizes: Sequence[int],
    n_i: int,
    n_f: int,
    field: FieldSpec | None = None,
    seed: int | None = None,
) -> tuple[GeneralizedSpec, ConversionPlan]:
    spec = generalized_merge_spec(initial_sizes, n_i, n_f, field, seed)
    return spec, plan_layout(spec, label="generalized_merge")


# ── Execution ─────────────────────────────────────────────────────────────

def encode_stripes(stripes: Iterable[Stripe], message: np.ndarray) -> list[np.ndarray]:
    """Node payloads (n, L) of every stripe for a (M,) or (M, L) message."""
    message = np.asarray(message, dtype=np.int64)
    block = message.reshape(message.shape[0], -1)
    return [stripe.encode(block) for stripe in stripes]


def _check_read_stripes(layout: StripeLayout, reads: Mapping[NodeRef, np.ndarray]) -> None:
    """Recompute parities of stripes whose data and some parities were all read."""
    f = layout.field
    for i, stripe in enumerate(layout.initial_stripes, start=1):
        data_refs = [(i, j) for j in range(1, stripe.k + 1)]
        parity_refs = [(i, j) for j in range(stripe.k + 1, stripe.n + 1) if (i, j) in reads]
        if not parity_refs or any(ref not in reads for ref in data_refs):
            continue
        data = np.vstack([reads[ref] for ref in data_refs])
        expected = dot(stripe.code.parity.data.T, data, f)
        for ref in parity_refs:
            if not np.array_equal(expected[ref[1] - stripe.k - 1], reads[ref]):
                raise PayloadCorruptionError(
                    f"initial stripe {i} node {ref[1]} disagrees with its data nodes"
                )


@dataclass
class ExecutionResult:
    nodes: dict[NodeRef, np.ndarray]
    touched: list[NodeRef]

    def stripes(self, layout: StripeLayout) -> list[np.ndarray]:
        return [
            np.vstack([self.nodes[(i, j)] for j in range(1, s.n + 1)])
            for i, s in enumerate(layout.final_stripes, start=1)
        ]


def compute_new_nodes(
    layout: StripeLayout, plan: ConversionPlan, fetch: Callable[[NodeRef], np.ndarray]
) -> ExecutionResult:
    """Read exactly the plan's read set through `fetch` and produce every new node."""
    order, matrix = plan.coefficient_matrix()
    touched: list[NodeRef] = []
    reads: dict[NodeRef, np.ndarray] = {}
    for ref in order:
        reads[ref] = np.asarray(fetch(ref), dtype=np.int64).ravel()
        touched.append(ref)
    _check_read_stripes(layout, reads)
    if not plan.new_nodes:
        return ExecutionResult({}, touched)
    stacked = np.vstack([reads[ref] for ref in order])
    values = dot(matrix, stacked, layout.field)
    nodes = {node.target: values[row] for row, node in enumerate(plan.new_nodes)}
    return ExecutionResult(nodes, touched)


def execute(
    layout: StripeLayout, plan: ConversionPlan, initial_payloads: Sequence[np.ndarray]
) -> ExecutionResult:
    """Apply a plan to in-memory initial stripes, each an (n^I, L) array."""
    if len(initial_payloads) != len(layout.initial_stripes):
        raise ParameterError(
            f"{len(initial_payloads)} stripes given, layout has {len(layout.initial_stripes)}"
        )

    def fetch(ref: NodeRef) -> np.ndarray:
        if ref not in plan.read_set:
            raise PlanInconsistencyError(f"node {ref} is outside the read set")
        return np.asarray(initial_payloads[ref[0] - 1])[ref[1] - 1]

    result = compute_new_nodes(layout, plan, fetch)
    for src, dst in plan.unchanged:
        stripe = np.asarray(initial_payloads[src[0] - 1], dtype=np.int64)
        result.nodes[dst] = stripe[src[1] - 1].ravel()
    return result


def convert_message(
    layout: StripeLayout, plan: ConversionPlan, message: np.ndarray
) -> tuple[list[np.ndarray], ExecutionResult]:
    """Encode a message under the initial layout, then convert it."""
    initial = encode_stripes(layout.initial_stripes, message)
    result = execute(layout, plan, initial)
    return result.stripes(layout), result


def direct_encoding(layout: StripeLayout, message: np.ndarray) -> list[np.ndarray]:
    """Final stripes encoded straight from the message."""
    return encode_stripes(layout.final_stripes, message)

