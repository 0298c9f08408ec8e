"""Arithmetic in GF(2^w) and dense linear algebra over it.

Multiplication goes through log/antilog tables built once per field; matrix
products and eliminations are vectorized with numpy over integer arrays.
Addition (and subtraction) is XOR.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NewType, Sequence

import numpy as np

from convertible.config.loader import field_polynomial, get_runtime_config
from convertible.errors import ParameterError, SingularMatrixError, ZeroInverseError

logger = logging.getLogger(__name__)

FieldElement = NewType("FieldElement", int)

MAX_BITS = 16


# ── Polynomial helpers over GF(2) ─────────────────────────────────────────

def _poly_degree(p: int) -> int:
    return p.bit_length() - 1


def _poly_mod(a: int, b: int) -> int:
    db = _poly_degree(b)
    while a and _poly_degree(a) >= db:
        a ^= b << (_poly_degree(a) - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Exhaustive divisor check: no polynomial of degree 1..w/2 divides `poly`."""
    w = _poly_degree(poly)
    if w < 1:
        return False
    for d in range(1, w // 2 + 1):
        for divisor in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, divisor) == 0:
                return False
    return True


def _clmul_mod(a: int, b: int, poly: int, w: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> w:
            a ^= poly
    return result


@lru_cache(maxsize=None)
def _build_tables(w: int, poly: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Antilog table (doubled to skip a modulo), log table and the generator used."""
    q = 1 << w
    order = q - 1
    for generator in range(1 if q == 2 else 2, q):
        exp = np.zeros(2 * order, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            x = _clmul_mod(x, generator, poly, w)
            if x == 1 and i < order - 1:
                break
        else:
            exp[order:] = exp[:order]
            log = np.zeros(q, dtype=np.int64)
            log[exp[:order]] = np.arange(order, dtype=np.int64)
            logger.debug("GF(2^%d) tables built, poly=%#x generator=%d", w, poly, generator)
            return exp, log, generator
    raise ParameterError(f"no primitive element found for poly {poly:#x}")


# ── Field ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FieldSpec:
    """The binary extension field GF(2^w) defined by an irreducible polynomial."""

    w: int
    reduction_poly: int
    exp: np.ndarray = field(init=False, repr=False, compare=False)
    log: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.w <= MAX_BITS:
            raise ParameterError(f"field width w={self.w} outside 1..{MAX_BITS}")
        if _poly_degree(self.reduction_poly) != self.w:
            raise ParameterError(
                f"reduction polynomial {self.reduction_poly:#x} does not have degree {self.w}"
            )
        if not is_irreducible(self.reduction_poly):
            raise ParameterError(f"reduction polynomial {self.reduction_poly:#x} is reducible")
        exp, log, _ = _build_tables(self.w, self.reduction_poly)
        object.__setattr__(self, "exp", exp)
        object.__setattr__(self, "log", log)

    @classmethod
    def from_bits(cls, bits: int) -> FieldSpec:
        return cls(bits, field_polynomial(bits))

    @property
    def order(self) -> int:
        return 1 << self.w

    @property
    def symbol_bytes(self) -> int:
        return (self.w + 7) // 8

    def element(self, value: int) -> FieldElement:
        if not 0 <= value < self.order:
            raise ParameterError(f"{value} is not an element of GF(2^{self.w})")
        return FieldElement(value)

    # Vectorized arithmetic; inputs are broadcastable integer arrays.

    def mul_array(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        product = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, product)

    def inv_array(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroInverseError("zero has no multiplicative inverse")
        return self.exp[(self.order - 1) - self.log[a]]

    def pow(self, a: int, e: int) -> FieldElement:
        if e == 0:
            return FieldElement(1)
        if a == 0:
            return FieldElement(0)
        return FieldElement(int(self.exp[(int(self.log[a]) * e) % (self.order - 1)]))

    def random_elements(self, rng: np.random.Generator, size, nonzero: bool = False) -> np.ndarray:
        low = 1 if nonzero else 0
        return rng.integers(low, self.order, size=size, dtype=np.int64)


def default_field() -> FieldSpec:
    """Field selected by configuration (GF(2^8) unless overridden)."""
    return FieldSpec.from_bits(get_runtime_config()["field_bits"])


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return FieldElement(a ^ b)


def mul(a: FieldElement, b: FieldElement, f: FieldSpec) -> FieldElement:
    if a == 0 or b == 0:
        return FieldElement(0)
    return FieldElement(int(f.exp[f.log[a] + f.log[b]]))


def inv(a: FieldElement, f: FieldSpec) -> FieldElement:
    if a == 0:
        raise ZeroInverseError("zero has no multiplicative inverse")
    return FieldElement(int(f.exp[(f.order - 1) - f.log[a]]))


def dot(a: np.ndarray, b: np.ndarray, f: FieldSpec) -> np.ndarray:
    """Matrix product of integer arrays over f (2-D by 2-D)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape[1] != b.shape[0]:
        raise ParameterError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    return np.bitwise_xor.reduce(f.mul_array(a[:, :, None], b[None, :, :]), axis=1)


def row_reduce(data: np.ndarray, f: FieldSpec, ncols: int | None = None):
    """Reduced row echelon form and pivot columns.

    Pivots are searched in column order among the first `ncols` columns; the
    pivot row is the lowest-indexed remaining row with a nonzero entry.
    """
    m = np.array(data, dtype=np.int64, copy=True)
    nrows, total = m.shape
    ncols = total if ncols is None else ncols
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        candidates = np.nonzero(m[row:, col])[0]
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
        m[row] = f.mul_array(m[row], inv(FieldElement(int(m[row, col])), f))
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        if others.size:
            m[others] ^= f.mul_array(m[others, col][:, None], m[row][None, :])
        pivots.append(col)
        row += 1
    return m, pivots


def batch_nonsingular(blocks: np.ndarray, f: FieldSpec) -> np.ndarray:
    """Boolean mask over a (N, s, s) stack: which square blocks are invertible.

    Runs forward elimination on every block at once.
    """
    m = np.array(blocks, dtype=np.int64, copy=True)
    count, size, _ = m.shape
    ok = np.ones(count, dtype=bool)
    idx = np.arange(count)
    for col in range(size):
        nonzero = m[:, col:, col] != 0
        ok &= nonzero.any(axis=1)
        pivot = col + nonzero.argmax(axis=1)
        pivot_rows = m[idx, pivot].copy()
        m[idx, pivot] = m[:, col]
        m[:, col] = pivot_rows
        lead = m[:, col, col]
        scale = f.inv_array(np.where(lead == 0, 1, lead))
        m[:, col] = f.mul_array(m[:, col], scale[:, None])
        if col + 1 < size:
            factors = m[:, col + 1 :, col]
            m[:, col + 1 :] ^= f.mul_array(factors[:, :, None], m[:, col][:, None, :])
    return ok


# ── Matrices ──────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class GfMatrix:
    """Dense immutable matrix over a FieldSpec."""

    data: np.ndarray
    field: FieldSpec

    def __post_init__(self):
        array = np.array(self.data, dtype=np.int64, copy=True)
        if array.ndim != 2:
            raise ParameterError(f"GfMatrix needs a 2-D array, got shape {array.shape}")
        if array.size and (array.min() < 0 or array.max() >= self.field.order):
            raise ParameterError(f"entries outside GF(2^{self.field.w})")
        array.setflags(write=False)
        object.__setattr__(self, "data", array)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], f: FieldSpec, cols: int | None = None):
        rows = [list(r) for r in rows]
        if not rows:
            return cls(np.zeros((0, cols or 0), dtype=np.int64), f)
        return cls(np.array(rows, dtype=np.int64), f)

    @classmethod
    def identity(cls, size: int, f: FieldSpec) -> GfMatrix:
        return cls(np.eye(size, dtype=np.int64), f)

    @classmethod
    def zeros(cls, rows: int, cols: int, f: FieldSpec) -> GfMatrix:
        return cls(np.zeros((rows, cols), dtype=np.int64), f)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def entries(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(int(v)) for v in self.data.ravel())

    def __getitem__(self, index) -> FieldElement:
        return FieldElement(int(self.data[index]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.field, self.data.shape, self.data.tobytes()))

    def __matmul__(self, other: GfMatrix) -> GfMatrix:
        return GfMatrix(dot(self.data, other.data, self.field), self.field)

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None):
        data = self.data
        if rows is not None:
            data = data[list(rows), :]
        if cols is not None:
            data = data[:, list(cols)]
        return GfMatrix(data, self.field)

    def hstack(self, other: GfMatrix) -> GfMatrix:
        return GfMatrix(np.hstack([self.data, other.data]), self.field)

    def rank(self) -> int:
        return rank(self, self.field)

    def solve(self, b: GfMatrix) -> GfMatrix:
        return solve(self, b, self.field)

    def inverse(self) -> GfMatrix:
        return solve(self, GfMatrix.identity(self.rows, self.field), self.field)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()


def rank(m: GfMatrix, f: FieldSpec) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = row_reduce(m.data, f)
    return len(pivots)


def solve(a: GfMatrix, b: GfMatrix, f: FieldSpec) -> GfMatrix:
    """x with a @ x == b for square nonsingular a."""
    if a.rows != a.cols:
        raise ParameterError(f"solve needs a square matrix, got {a.rows}x{a.cols}")
    if b.rows != a.rows:
        raise ParameterError(f"right-hand side has {b.rows} rows, expected {a.rows}")
    reduced, pivots = row_reduce(np.hstack([a.data, b.data]), f, ncols=a.cols)
    if len(pivots) < a.rows:
        raise SingularMatrixError(f"{a.rows}x{a.cols} matrix is singular (rank {len(pivots)})")
    return GfMatrix(reduced[:, a.cols:], f)
