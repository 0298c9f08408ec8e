"""Convertible-code framework: parameters, partitions, stripes, plans and access accounting.

Stripes, nodes and message positions are 1-based throughout the package;
`plan_to_dict` / `report_to_dict` shift them to 0-based for files.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from math import lcm
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from convertible.codes import MdsCode
from convertible.errors import ParameterError, PlanInconsistencyError
from convertible.galois import FieldSpec

logger = logging.getLogger(__name__)

NodeRef = tuple[int, int]  # (stripe, node)


# ── Parameters and partitions ─────────────────────────────────────────────

@dataclass(frozen=True)
class ConversionParams:
    """(n^I, k^I; n^F, k^F) with the derived quantities of the framework."""

    n_i: int
    k_i: int
    n_f: int
    k_f: int

    def __post_init__(self):
        if not self.n_i > self.k_i >= 1:
            raise ParameterError(f"initial code needs n > k >= 1, got [{self.n_i},{self.k_i}]")
        if not self.n_f > self.k_f >= 1:
            raise ParameterError(f"final code needs n > k >= 1, got [{self.n_f},{self.k_f}]")

    @property
    def r_i(self) -> int:
        return self.n_i - self.k_i

    @property
    def r_f(self) -> int:
        return self.n_f - self.k_f

    @property
    def M(self) -> int:
        return lcm(self.k_i, self.k_f)

    @property
    def s_i_count(self) -> int:
        return self.M // self.k_i

    @property
    def s_f_count(self) -> int:
        return self.M // self.k_f

    @property
    def regime(self) -> str:
        if self.k_i == self.k_f:
            return "degenerate"
        if self.k_f % self.k_i == 0:
            return "merge"
        if self.k_i % self.k_f == 0:
            return "split"
        return "general"

    def __str__(self) -> str:
        return f"({self.n_i},{self.k_i};{self.n_f},{self.k_f})"


def _check_partition(sets: Sequence[Sequence[int]], M: int, size: int, side: str):
    seen: set[int] = set()
    for index, s in enumerate(sets, start=1):
        if len(s) != size:
            raise ParameterError(f"{side} set {index} has {len(s)} positions, expected {size}")
        if seen.intersection(s):
            raise ParameterError(f"{side} set {index} overlaps an earlier set")
        seen.update(s)
    if seen != set(range(1, M + 1)):
        raise ParameterError(f"{side} sets do not cover positions 1..{M}")


@dataclass(frozen=True)
class PartitionPair:
    """Initial and final partitions of the message positions [M].

    Each set is an ordered tuple: its i-th entry is the message position
    encoded by row i of the stripe's generator.
    """

    initial_sets: tuple[tuple[int, ...], ...]
    final_sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "initial_sets", tuple(tuple(s) for s in self.initial_sets))
        object.__setattr__(self, "final_sets", tuple(tuple(s) for s in self.final_sets))

    @classmethod
    def contiguous(cls, params: ConversionParams) -> PartitionPair:
        def blocks(size: int, count: int):
            return tuple(tuple(range(i * size + 1, (i + 1) * size + 1)) for i in range(count))

        return cls(blocks(params.k_i, params.s_i_count), blocks(params.k_f, params.s_f_count))

    def validate(self, params: ConversionParams) -> None:
        if len(self.initial_sets) != params.s_i_count:
            raise ParameterError(
                f"{len(self.initial_sets)} initial sets, expected {params.s_i_count}"
            )
        if len(self.final_sets) != params.s_f_count:
            raise ParameterError(f"{len(self.final_sets)} final sets, expected {params.s_f_count}")
        _check_partition(self.initial_sets, params.M, params.k_i, "initial")
        _check_partition(self.final_sets, params.M, params.k_f, "final")


# ── Stripes and specs ─────────────────────────────────────────────────────

@dataclass(frozen=True)
class Stripe:
    """One stripe: the message positions it encodes and the (possibly shortened) code."""

    positions: tuple[int, ...]
    code: MdsCode

    def __post_init__(self):
        if len(self.positions) != self.code.k:
            raise ParameterError(
                f"stripe with {len(self.positions)} positions cannot use a k={self.code.k} code"
            )

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def k(self) -> int:
        return self.code.k

    def encode(self, message: np.ndarray) -> np.ndarray:
        """Node payloads (n, L) of this stripe for a (M,) or (M, L) message."""
        message = np.asarray(message, dtype=np.int64)
        return self.code.encode(message[[p - 1 for p in self.positions]])

    def encoding_vectors(self, M: int) -> np.ndarray:
        """(n, M) matrix whose row j is the encoding vector of node j+1."""
        vectors = np.zeros((self.n, M), dtype=np.int64)
        vectors[:, [p - 1 for p in self.positions]] = self.code.generator.data.T
        return vectors


class StripeLayout(Protocol):
    """Anything that lays out a message over initial and final stripes."""

    @property
    def field(self) -> FieldSpec: ...

    @property
    def message_length(self) -> int: ...

    @property
    def initial_stripes(self) -> list[Stripe]: ...

    @property
    def final_stripes(self) -> list[Stripe]: ...


@dataclass(frozen=True)
class ConvertibleCodeSpec:
    """Codes and partitions of an (n^I, k^I; n^F, k^F) convertible code."""

    params: ConversionParams
    partitions: PartitionPair
    initial_code: MdsCode
    final_code: MdsCode
    field: FieldSpec

    def __post_init__(self):
        p = self.params
        if (self.initial_code.n, self.initial_code.k) != (p.n_i, p.k_i):
            raise ParameterError(f"initial code is not [{p.n_i},{p.k_i}]")
        if (self.final_code.n, self.final_code.k) != (p.n_f, p.k_f):
            raise ParameterError(f"final code is not [{p.n_f},{p.k_f}]")
        if self.initial_code.field != self.field or self.final_code.field != self.field:
            raise ParameterError("codes and spec must share one field")
        self.partitions.validate(p)

    @property
    def message_length(self) -> int:
        return self.params.M

    @property
    def initial_stripes(self) -> list[Stripe]:
        return [Stripe(s, self.initial_code) for s in self.partitions.initial_sets]

    @property
    def final_stripes(self) -> list[Stripe]:
        return [Stripe(s, self.final_code) for s in self.partitions.final_sets]


@dataclass(frozen=True)
class GeneralizedSpec:
    """Generalized split or merge layout: stripes of unequal sizes, each a shortened code."""

    kind: str  # "generalized_split" | "generalized_merge"
    initial: tuple[Stripe, ...]
    final: tuple[Stripe, ...]
    field: FieldSpec
    r_i: int
    r_f: int

    @property
    def message_length(self) -> int:
        return sum(s.k for s in self.initial)

    @property
    def initial_stripes(self) -> list[Stripe]:
        return list(self.initial)

    @property
    def final_stripes(self) -> list[Stripe]:
        return list(self.final)

    @property
    def initial_sizes(self) -> list[int]:
        return [s.k for s in self.initial]

    @property
    def final_sizes(self) -> list[int]:
        return [s.k for s in self.final]


def encoding_vector(layout: StripeLayout, side: str, ref: NodeRef) -> np.ndarray:
    """The length-M encoding vector of an initial or final node."""
    stripes = layout.initial_stripes if side == "initial" else layout.final_stripes
    stripe, node = ref
    return stripes[stripe - 1].encoding_vectors(layout.message_length)[node - 1]


def node_grid(stripes: Sequence[Stripe]) -> list[NodeRef]:
    return [(i, j) for i, s in enumerate(stripes, start=1) for j in range(1, s.n + 1)]


# ── Plans ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NewNode:
    """A final node written during conversion as a linear combination of read nodes."""

    target: NodeRef
    coeffs: tuple[tuple[NodeRef, int], ...]

    @property
    def support(self) -> set[NodeRef]:
        return {ref for ref, c in self.coeffs if c}


@dataclass(frozen=True)
class ConversionPlan:
    """Node taxonomy and read access set of one conversion."""

    unchanged: tuple[tuple[NodeRef, NodeRef], ...]
    retired: tuple[NodeRef, ...]
    new_nodes: tuple[NewNode, ...]
    read_set: frozenset[NodeRef]
    label: str = ""

    @property
    def reads(self) -> int:
        return len(self.read_set)

    @property
    def writes(self) -> int:
        return len(self.new_nodes)

    @property
    def cost(self) -> int:
        return self.reads + self.writes

    def coefficient_matrix(self) -> tuple[list[NodeRef], np.ndarray]:
        """Sorted read nodes and the (new nodes x reads) coefficient matrix."""
        reads = sorted(self.read_set)
        column = {ref: c for c, ref in enumerate(reads)}
        matrix = np.zeros((len(self.new_nodes), len(reads)), dtype=np.int64)
        for row, node in enumerate(self.new_nodes):
            for ref, coeff in node.coeffs:
                matrix[row, column[ref]] ^= coeff
        return reads, matrix


def make_plan(
    initial: Sequence[Stripe],
    final: Sequence[Stripe],
    unchanged: Mapping[NodeRef, NodeRef],
    new_nodes: Iterable[NewNode],
    read_set: Iterable[NodeRef] | None = None,
    label: str = "",
) -> ConversionPlan:
    """Assemble a plan; the read set defaults to the union of new-node supports."""
    new_nodes = tuple(new_nodes)
    if read_set is None:
        read_set = set().union(*(n.support for n in new_nodes)) if new_nodes else set()
    sources = set(unchanged)
    retired = tuple(ref for ref in node_grid(initial) if ref not in sources)
    ordered = tuple(sorted(unchanged.items(), key=lambda item: item[1]))
    return ConversionPlan(ordered, retired, new_nodes, frozenset(read_set), label)


@dataclass(frozen=True)
class NodeTaxonomy:
    unchanged: int
    retired: int
    new: int
    unchanged_per_final_stripe: tuple[int, ...]


def classify(spec: StripeLayout, plan: ConversionPlan) -> NodeTaxonomy:
    """Counts of unchanged/retired/new nodes after checking the covering rules."""
    initial_grid = set(node_grid(spec.initial_stripes))
    final_grid = set(node_grid(spec.final_stripes))
    sources = [src for src, _ in plan.unchanged]
    targets = [dst for _, dst in plan.unchanged]
    new_targets = [n.target for n in plan.new_nodes]

    if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
        raise PlanInconsistencyError("a node appears twice in the unchanged mapping")
    if set(sources) & set(plan.retired):
        raise PlanInconsistencyError("a node is both unchanged and retired")
    covered = set(sources) | set(plan.retired)
    if covered != initial_grid or len(sources) + len(plan.retired) != len(initial_grid):
        raise PlanInconsistencyError("unchanged and retired nodes do not cover the initial grid")
    if len(set(new_targets)) != len(new_targets) or set(new_targets) & set(targets):
        raise PlanInconsistencyError("a final node is both new and unchanged")
    if set(new_targets) | set(targets) != final_grid:
        raise PlanInconsistencyError("new and unchanged nodes do not cover the final grid")
    if not plan.read_set <= initial_grid:
        raise PlanInconsistencyError("read set references nodes outside the initial grid")
    for node in plan.new_nodes:
        if not node.support <= plan.read_set:
            raise PlanInconsistencyError(
                f"new node {node.target} combines nodes outside the read set"
            )

    per_stripe = [0] * len(spec.final_stripes)
    for stripe, _ in targets:
        per_stripe[stripe - 1] += 1
    return NodeTaxonomy(len(sources), len(plan.retired), len(new_targets), tuple(per_stripe))


def linear_mismatches(spec: StripeLayout, plan: ConversionPlan) -> list[NodeRef]:
    """Final nodes whose encoding vector the plan does not reproduce exactly."""
    f = spec.field
    M = spec.message_length
    initial = np.vstack([s.encoding_vectors(M) for s in spec.initial_stripes])
    final = np.vstack([s.encoding_vectors(M) for s in spec.final_stripes])
    initial_row = {ref: r for r, ref in enumerate(node_grid(spec.initial_stripes))}
    final_row = {ref: r for r, ref in enumerate(node_grid(spec.final_stripes))}

    bad: list[NodeRef] = []
    for src, dst in plan.unchanged:
        if not np.array_equal(initial[initial_row[src]], final[final_row[dst]]):
            bad.append(dst)
    for node in plan.new_nodes:
        value = np.zeros(M, dtype=np.int64)
        for ref, coeff in node.coeffs:
            value ^= f.mul_array(coeff, initial[initial_row[ref]])
        if not np.array_equal(value, final[final_row[node.target]]):
            bad.append(node.target)
    return bad


# ── Accounting ────────────────────────────────────────────────────────────

@dataclass
class AccessReport:
    reads: int
    writes: int
    total: int
    bound: int | None = None
    bound_reads: int | None = None
    default_total: int | None = None
    default_reads: int | None = None
    savings: float | None = None
    verdict: str | None = None

    @property
    def optimal(self) -> bool:
        return self.bound is not None and self.total == self.bound


def access_cost(plan: ConversionPlan) -> AccessReport:
    return AccessReport(reads=plan.reads, writes=plan.writes, total=plan.cost)


def reuse_coinciding_nodes(
    spec: StripeLayout, systematic_only: bool = False
) -> dict[NodeRef, NodeRef]:
    """Initial -> final node pairs whose encoding vectors are identical."""
    M = spec.message_length
    by_vector: dict[bytes, NodeRef] = {}
    for i, stripe in enumerate(spec.initial_stripes, start=1):
        for j, vector in enumerate(stripe.encoding_vectors(M), start=1):
            if systematic_only and j > stripe.k:
                continue
            by_vector.setdefault(vector.tobytes(), (i, j))
    mapping: dict[NodeRef, NodeRef] = {}
    for i, stripe in enumerate(spec.final_stripes, start=1):
        for j, vector in enumerate(stripe.encoding_vectors(M), start=1):
            source = by_vector.get(vector.tobytes())
            if source is not None and source not in mapping:
                mapping[source] = (i, j)
    return mapping


def systematic_sources(spec: StripeLayout) -> dict[int, NodeRef]:
    """Message position -> the initial systematic node storing it."""
    return {
        p: (i, j)
        for i, stripe in enumerate(spec.initial_stripes, start=1)
        for j, p in enumerate(stripe.positions, start=1)
    }


def default_plan(spec: StripeLayout, reuse_systematic: bool = True) -> ConversionPlan:
    """Read k^I nodes of every initial stripe, decode, and re-encode every final stripe.

    With `reuse_systematic` final nodes identical to initial ones are kept
    unchanged and only the rest is written; without it every final node is new.
    """
    sources = systematic_sources(spec)
    unchanged = reuse_coinciding_nodes(spec) if reuse_systematic else {}
    kept = set(unchanged.values())
    new_nodes = []
    for i, stripe in enumerate(spec.final_stripes, start=1):
        generator = stripe.code.generator.data
        for j in range(1, stripe.n + 1):
            if (i, j) in kept:
                continue
            coeffs = tuple(
                (sources[p], int(generator[row, j - 1]))
                for row, p in enumerate(stripe.positions)
                if generator[row, j - 1]
            )
            new_nodes.append(NewNode((i, j), coeffs))
    read_set = None if reuse_systematic else set(sources.values())
    return make_plan(
        spec.initial_stripes, spec.final_stripes, unchanged, new_nodes, read_set, label="default"
    )


# ── Serialization ─────────────────────────────────────────────────────────

def _zero_based(ref: NodeRef) -> list[int]:
    return [ref[0] - 1, ref[1] - 1]


def plan_to_dict(plan: ConversionPlan) -> dict:
    """JSON-ready plan with 0-based (stripe, node) pairs."""
    return {
        "label": plan.label,
        "reads": plan.reads,
        "writes": plan.writes,
        "total": plan.cost,
        "read_set": [_zero_based(ref) for ref in sorted(plan.read_set)],
        "new_nodes": [
            {
                "target": _zero_based(node.target),
                "coeffs": [[*_zero_based(ref), c] for ref, c in node.coeffs],
            }
            for node in plan.new_nodes
        ],
        "unchanged_map": [[_zero_based(src), _zero_based(dst)] for src, dst in plan.unchanged],
        "retired": [_zero_based(ref) for ref in plan.retired],
    }


def report_to_dict(report: AccessReport) -> dict:
    data = asdict(report)
    if data["verdict"] is None:
        del data["verdict"]
    return data
