"""Systematic MDS codes: construction, MDS verification, shortening and lengthening.

Coordinates are 1-based: positions 1..k are systematic, k+1..n are parity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Mapping

import numpy as np

from convertible.config.loader import SETTINGS
from convertible.errors import (
    BudgetError,
    ConstructionError,
    ParameterError,
    SearchExhaustedError,
)
from convertible.galois import FieldSpec, GfMatrix, batch_nonsingular, dot, solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MdsCode:
    """A systematic [n, k] linear code with generator [I | P]."""

    n: int
    k: int
    generator: GfMatrix
    field: FieldSpec

    def __post_init__(self):
        if not self.n > self.k >= 1:
            raise ParameterError(f"need n > k >= 1, got n={self.n} k={self.k}")
        if (self.generator.rows, self.generator.cols) != (self.k, self.n):
            raise ParameterError(
                f"generator is {self.generator.rows}x{self.generator.cols}, "
                f"expected {self.k}x{self.n}"
            )
        if not np.array_equal(self.generator.data[:, : self.k], np.eye(self.k, dtype=np.int64)):
            raise ParameterError("generator is not in systematic form [I | P]")

    @classmethod
    def from_parity(cls, parity: GfMatrix) -> MdsCode:
        k, r = parity.rows, parity.cols
        generator = GfMatrix.identity(k, parity.field).hstack(parity)
        return cls(k + r, k, generator, parity.field)

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def parity(self) -> GfMatrix:
        return self.generator.submatrix(cols=range(self.k, self.n))

    def column(self, node: int) -> np.ndarray:
        """Generator column of a 1-based node."""
        return self.generator.data[:, node - 1]

    def encode(self, message: np.ndarray) -> np.ndarray:
        """Codeword(s) for a (k,) or (k, L) message array; returns (n,) or (n, L)."""
        message = np.asarray(message, dtype=np.int64)
        flat = message.ndim == 1
        block = message.reshape(self.k, -1)
        parity = dot(self.parity.data.T, block, self.field)
        codeword = np.vstack([block, parity])
        return codeword.ravel() if flat else codeword


def make_systematic_mds(n: int, k: int, f: FieldSpec, seed: int | None = None) -> MdsCode:
    """[I | P] with P a Cauchy matrix over two disjoint seeded element sequences."""
    if not n > k >= 1:
        raise ParameterError(f"need n > k >= 1, got n={n} k={k}")
    if n > f.order:
        raise ParameterError(f"n={n} exceeds field size q={f.order}")
    seed = SETTINGS["codes"]["seed"] if seed is None else seed
    elements = np.random.default_rng(seed).permutation(f.order)[:n]
    xs, ys = elements[:k], elements[k:]
    if len(set(elements.tolist())) != n:
        raise ConstructionError(f"could not draw {n} distinct elements of GF(2^{f.w})")
    parity = f.inv_array(xs[:, None] ^ ys[None, :])
    code = MdsCode.from_parity(GfMatrix(parity, f))
    if _minor_count(k, n - k) <= SETTINGS["codes"]["mds_check_budget"] and not is_mds(code):
        raise ConstructionError(f"Cauchy construction [{n},{k}] failed the MDS check")
    return code


def make_power_code(points: Iterable[int], r: int, f: FieldSpec) -> MdsCode:
    """Code whose parity t (t = 0..r-1) evaluates sum_j m_j * x_j^t.

    Not MDS for every choice of points; callers validate with `is_mds`.
    """
    xs = [int(x) for x in points]
    parity = [[int(f.pow(x, t)) for t in range(r)] for x in xs]
    return MdsCode.from_parity(GfMatrix.from_rows(parity, f))


def _minor_count(k: int, r: int) -> int:
    return sum(comb(k, s) * comb(r, s) for s in range(1, min(k, r) + 1))


def is_mds(c: MdsCode, budget: int | None = None) -> bool:
    """True iff every square submatrix of the parity block is nonsingular."""
    budget = SETTINGS["codes"]["mds_check_budget"] if budget is None else budget
    if _minor_count(c.k, c.r) > budget:
        raise BudgetError(f"[{c.n},{c.k}] needs {_minor_count(c.k, c.r)} minors (budget {budget})")
    parity = c.parity.data
    if np.any(parity == 0):
        return False
    for size in range(2, min(c.k, c.r) + 1):
        rows = np.array(list(combinations(range(c.k), size)), dtype=np.intp)
        cols = np.array(list(combinations(range(c.r), size)), dtype=np.intp)
        blocks = parity[rows[:, None, :, None], cols[None, :, None, :]]
        if not batch_nonsingular(blocks.reshape(-1, size, size), c.field).all():
            return False
    return True


def shorten(c: MdsCode, positions: Iterable[int]) -> MdsCode:
    """Keep the codewords that vanish on the given systematic positions, then drop them."""
    positions = sorted(set(positions))
    if any(p < 1 or p > c.k for p in positions):
        raise ParameterError(f"shortening positions {positions} must be systematic (1..{c.k})")
    if len(positions) >= c.k:
        raise ParameterError(f"cannot shorten [{c.n},{c.k}] by {len(positions)} positions")
    if not positions:
        return c
    dropped = {p - 1 for p in positions}
    keep_rows = [i for i in range(c.k) if i not in dropped]
    return MdsCode.from_parity(c.parity.submatrix(rows=keep_rows))


def lengthen(c: MdsCode, s: int, f: FieldSpec, seed: int | None = None) -> MdsCode:
    """[n+s, k+s] MDS code with the same redundancy; new systematic positions k+1..k+s.

    Shortening the result on positions k+1..k+s returns `c`.
    """
    if s < 0:
        raise ParameterError(f"lengthening amount must be >= 0, got {s}")
    if f != c.field:
        raise ParameterError("lengthening must stay in the code's field")
    if s == 0:
        return c
    seed = SETTINGS["codes"]["seed"] if seed is None else seed
    budget = SETTINGS["codes"]["lengthen_budget"]
    rng = np.random.default_rng(seed)
    parity = c.parity.data
    draws = 0
    while parity.shape[0] < c.k + s:
        if draws >= budget:
            raise SearchExhaustedError(
                f"no MDS lengthening of [{c.n},{c.k}] by {s} in GF(2^{f.w}) "
                f"within {budget} draws"
            )
        draws += 1
        candidate = np.vstack([parity, f.random_elements(rng, (1, c.r), nonzero=True)])
        if is_mds(MdsCode.from_parity(GfMatrix(candidate, f))):
            parity = candidate
    logger.debug("lengthened [%d,%d] by %d after %d draws", c.n, c.k, s, draws)
    return MdsCode.from_parity(GfMatrix(parity, f))


def decode(c: MdsCode, symbols: Mapping[int, np.ndarray]) -> np.ndarray:
    """Recover the (k, L) message from any k surviving nodes (1-based node -> symbols)."""
    if len(symbols) < c.k:
        raise ParameterError(f"need {c.k} nodes to decode, got {len(symbols)}")
    nodes = sorted(symbols)[: c.k]
    received = np.vstack([np.asarray(symbols[j], dtype=np.int64).reshape(1, -1) for j in nodes])
    system = GfMatrix(c.generator.data[:, [j - 1 for j in nodes]].T, c.field)
    return solve(system, GfMatrix(received, c.field), c.field).data
