"""Access-cost lower bounds and the partitions that achieve them.

Reads count initial nodes accessed, writes count final nodes produced.
Every bound assumes systematic nodes can be kept unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from convertible.errors import ParameterError, RegimeError
from convertible.framework import ConversionParams, PartitionPair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostBound:
    reads: int
    writes: int

    @property
    def total(self) -> int:
        return self.reads + self.writes


def _per_stripe_reads(k_i: int, largest_overlap: int, r_f: int) -> int:
    return k_i - max(largest_overlap - r_f, 0)


def merge_bound(params: ConversionParams) -> CostBound:
    """Merging ς = k^F/k^I stripes of one code into a single stripe."""
    p = params
    if p.k_f % p.k_i or p.k_f == p.k_i:
        raise RegimeError(f"{p} is not a merge (k^F must be a multiple >= 2 of k^I)")
    stripes = p.k_f // p.k_i
    reads = stripes * p.k_i if p.r_i < p.r_f else stripes * min(p.k_i, p.r_f)
    return CostBound(reads, p.r_f)


def split_bound(params: ConversionParams) -> CostBound:
    """Splitting one stripe into ς = k^I/k^F stripes."""
    p = params
    if p.k_i % p.k_f or p.k_f == p.k_i:
        raise RegimeError(f"{p} is not a split (k^I must be a multiple >= 2 of k^F)")
    stripes = p.k_i // p.k_f
    if p.r_i < p.r_f:
        return CostBound(p.k_i, stripes * p.r_f)
    return CostBound((stripes - 1) * p.k_f + min(p.r_f, p.k_f), stripes * p.r_f)


def degenerate_bound(params: ConversionParams) -> CostBound:
    """k^I = k^F: each stripe keeps its data; only missing parities cost anything."""
    p = params
    if p.k_i != p.k_f:
        raise RegimeError(f"{p} changes the dimension")
    if p.r_i >= p.r_f:
        return CostBound(0, 0)
    return CostBound(p.M, p.s_f_count * (p.r_f - p.r_i))


def gen_split_bound(
    k_i: int, final_sizes: Sequence[int], r_f: int, r_i: int | None = None
) -> int:
    """Read lower bound for splitting one stripe into stripes of the given sizes."""
    if sum(final_sizes) != k_i or any(k < 1 for k in final_sizes):
        raise ParameterError(f"sizes {list(final_sizes)} do not partition k^I={k_i}")
    if r_i is not None and r_i < r_f:
        return k_i
    if len(final_sizes) == 1:
        return 0
    return _per_stripe_reads(k_i, max(final_sizes), r_f)


def gen_merge_bound(initial_sizes: Sequence[int], r_i: int, r_f: int) -> list[int]:
    """Per-stripe read lower bounds for merging stripes of the given sizes."""
    if any(k < 1 for k in initial_sizes):
        raise ParameterError(f"invalid initial sizes {list(initial_sizes)}")
    if r_i < r_f:
        return list(initial_sizes)
    return [min(k, r_f) for k in initial_sizes]


def general_bound(params: ConversionParams) -> CostBound:
    """Bound for arbitrary k^I != k^F under optimally chosen partitions."""
    p = params
    if p.k_i == p.k_f:
        raise RegimeError(f"{p} has k^I = k^F; use degenerate_bound")
    writes = p.s_f_count * p.r_f
    if p.r_i >= p.r_f and p.r_f < min(p.k_i, p.k_f):
        leftover = p.s_i_count % p.s_f_count
        reads = p.s_i_count * p.r_f + leftover * (p.k_i - max(p.k_f % p.k_i, p.r_f))
        return CostBound(reads, writes)
    return CostBound(p.M, writes)


def bound_for(params: ConversionParams) -> CostBound:
    """The bound matching the parameters' regime."""
    return {
        "degenerate": degenerate_bound,
        "merge": merge_bound,
        "split": split_bound,
        "general": general_bound,
    }[params.regime](params)


# ── Partitions ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class IntersectionMatrix:
    """entries[i][j] = |I_i ∩ F_j|."""

    entries: np.ndarray

    @classmethod
    def of(cls, partitions: PartitionPair) -> IntersectionMatrix:
        initial = [set(s) for s in partitions.initial_sets]
        final = [set(s) for s in partitions.final_sets]
        return cls(np.array([[len(a & b) for b in final] for a in initial], dtype=np.int64))

    @property
    def row_maxima(self) -> list[int]:
        return self.entries.max(axis=1).tolist()

    def objective(self, r_f: int) -> int:
        """Σ_i max(M*_i - r^F, 0): positions the reads can skip."""
        return int(sum(max(m - r_f, 0) for m in self.row_maxima))

    def read_bound(self, k_i: int, r_f: int) -> int:
        return sum(_per_stripe_reads(k_i, m, r_f) for m in self.row_maxima)


def _cut(seq: Sequence[int], size: int) -> list[list[int]]:
    return [list(seq[i : i + size]) for i in range(0, len(seq), size)]


def _fill(groups: list[list[int]], capacity: int, pieces: list[list[int]]) -> None:
    """First-fit the pieces into groups with spare capacity, splitting as needed."""
    g = 0
    for piece in pieces:
        piece = list(piece)
        while piece:
            while len(groups[g]) >= capacity:
                g += 1
            take = capacity - len(groups[g])
            groups[g].extend(piece[:take])
            piece = piece[take:]


def _merge_side_layout(p: ConversionParams) -> list[list[int]]:
    """k^I < k^F: whole initial stripes first, then the remainder stripes in pieces."""
    whole, a = divmod(p.k_f, p.k_i)
    initial = PartitionPair.contiguous(p).initial_sets
    groups: list[list[int]] = []
    for g in range(p.s_f_count):
        members = initial[g * whole : (g + 1) * whole]
        groups.append([pos for stripe in members for pos in stripe])
    leftovers = initial[p.s_f_count * whole :]
    if not leftovers:
        return groups
    cut = [_cut(stripe, a) for stripe in leftovers]
    heads = [pieces[0] for pieces in cut]
    full = [piece for pieces in cut for piece in pieces[1:] if len(piece) == a]
    small = [piece for pieces in cut for piece in pieces[1:] if len(piece) < a]
    for g, piece in enumerate(heads + full):
        groups[g].extend(piece)
    _fill(groups, p.k_f, small)
    return groups


def _split_side_layout(p: ConversionParams) -> list[list[int]]:
    """k^I > k^F: every initial stripe yields full pieces led by its head; tails are pooled."""
    initial = PartitionPair.contiguous(p).initial_sets
    groups: list[list[int]] = []
    tails: list[list[int]] = []
    for stripe in initial:
        pieces = _cut(stripe, p.k_f)
        if len(pieces[-1]) < p.k_f:
            tails.append(pieces.pop())
        groups.extend(pieces)
    pooled = [[] for _ in range(p.s_f_count - len(groups))]
    _fill(pooled, p.k_f, tails)
    return groups + pooled


def optimal_partitions(params: ConversionParams) -> tuple[PartitionPair, IntersectionMatrix]:
    """Partitions maximizing Σ max(M*_i - r^F, 0), with their intersection matrix.

    Initial sets are contiguous blocks. On the final side, each initial stripe
    keeps its largest piece (its head) in a single final stripe.
    """
    p = params
    if p.k_i == p.k_f:
        raise RegimeError(f"{p} has k^I = k^F; partitions are the identity")
    initial = PartitionPair.contiguous(p).initial_sets
    groups = _merge_side_layout(p) if p.k_i < p.k_f else _split_side_layout(p)
    pair = PartitionPair(initial, tuple(tuple(g) for g in groups))
    pair.validate(p)
    matrix = IntersectionMatrix.of(pair)
    logger.debug("optimal partitions for %s: row maxima %s", p, matrix.row_maxima)
    return pair, matrix


def optimal_row_maxima(params: ConversionParams) -> list[int]:
    """Row-maxima pattern of the optimal partitions, sorted descending."""
    p = params
    if p.k_i < p.k_f:
        whole = p.s_f_count * (p.k_f // p.k_i)
        return [p.k_i] * whole + [p.k_f % p.k_i] * (p.s_i_count - whole)
    return [p.k_f] * p.s_i_count
