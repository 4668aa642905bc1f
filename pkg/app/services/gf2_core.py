# app/services/gf2_core.py
"""
Bit-packed exact linear algebra over GF(2).

Vectors are Python ints: coordinate i (1-based) lives in bit i-1. Matrix rows
are ints with bit j holding column j, so a matrix is a tuple of row ints.
Python ints are arbitrary-width bitsets, so XOR of two rows is one word-parallel
operation regardless of the column count.
"""

from __future__ import annotations
import logging
import random
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from ..config import HARD_MAX_GL_N
from ..errors import CapExceededError, InvalidInputError, PreconditionError, VerificationError

logger = logging.getLogger(__name__)


def parity(x: int) -> int:
    return x.bit_count() & 1


def _bit_string(bits: int, n: int) -> str:
    """Bits 0..n-1 as '0'/'1' characters, lowest bit first."""
    return format(bits, f"0{n}b")[::-1] if n else ""


def _from_bit_string(chars: str) -> int:
    """Inverse of _bit_string."""
    return int(chars[::-1], 2) if chars else 0


class Gf2Vector(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    bits: int = 0

    @model_validator(mode="after")
    def _check_width(self) -> "Gf2Vector":
        if self.n < 0:
            raise ValueError("Vector dimension must be non-negative")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"Bits {self.bits} do not fit in dimension {self.n}")
        return self

    @classmethod
    def zero(cls, n: int) -> "Gf2Vector":
        return cls(n=n, bits=0)

    @classmethod
    def unit(cls, n: int, i: int) -> "Gf2Vector":
        """Unit vector e_i, 1-based."""
        return cls(n=n, bits=1 << (i - 1))

    @classmethod
    def from_coords(cls, coords: Sequence[int]) -> "Gf2Vector":
        bits = _from_bit_string("".join("1" if c & 1 else "0" for c in coords))
        return cls(n=len(coords), bits=bits)

    def coords(self) -> List[int]:
        return [1 if ch == "1" else 0 for ch in _bit_string(self.bits, self.n)]

    def __add__(self, other: "Gf2Vector") -> "Gf2Vector":
        _same_dim(self.n, other.n)
        return Gf2Vector(n=self.n, bits=self.bits ^ other.bits)

    def dot(self, other: "Gf2Vector") -> int:
        _same_dim(self.n, other.n)
        return parity(self.bits & other.bits)

    def is_zero(self) -> bool:
        return self.bits == 0


class Gf2Matrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_rows: int
    n_cols: int
    rows: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "Gf2Matrix":
        if len(self.rows) != self.n_rows:
            raise ValueError(f"Expected {self.n_rows} rows, got {len(self.rows)}")
        limit = 1 << self.n_cols
        for i, row in enumerate(self.rows):
            if row < 0 or row >= limit:
                raise ValueError(f"Row {i} has bits outside {self.n_cols} columns")
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[int], n_cols: int) -> "Gf2Matrix":
        return cls(n_rows=len(rows), n_cols=n_cols, rows=tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n_rows=n, n_cols=n, rows=tuple(1 << i for i in range(n)))

    @classmethod
    def zero(cls, n_rows: int, n_cols: int) -> "Gf2Matrix":
        return cls(n_rows=n_rows, n_cols=n_cols, rows=(0,) * n_rows)

    @classmethod
    def from_columns(cls, columns: Sequence[int], n_rows: int) -> "Gf2Matrix":
        rows = [0] * n_rows
        for j, col in enumerate(columns):
            for i in range(n_rows):
                if (col >> i) & 1:
                    rows[i] |= 1 << j
        return cls(n_rows=n_rows, n_cols=len(columns), rows=tuple(rows))

    @property
    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def entry(self, i: int, j: int) -> int:
        """0-based entry (i, j)."""
        return (self.rows[i] >> j) & 1

    def column(self, j: int) -> int:
        col = 0
        for i, row in enumerate(self.rows):
            if (row >> j) & 1:
                col |= 1 << i
        return col

    def columns(self) -> List[int]:
        return [self.column(j) for j in range(self.n_cols)]

    def apply_bits(self, x: int) -> int:
        return _from_bit_string("".join("1" if parity(row & x) else "0" for row in self.rows))

    def apply(self, x: Gf2Vector) -> Gf2Vector:
        _same_dim(self.n_cols, x.n)
        return Gf2Vector(n=self.n_rows, bits=self.apply_bits(x.bits))

    def __matmul__(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.n_cols != other.n_rows:
            raise InvalidInputError(
                f"Cannot multiply {self.n_rows}x{self.n_cols} by {other.n_rows}x{other.n_cols}"
            )
        rows = []
        for row in self.rows:
            acc = 0
            k = 0
            while row:
                if row & 1:
                    acc ^= other.rows[k]
                row >>= 1
                k += 1
            rows.append(acc)
        return Gf2Matrix(n_rows=self.n_rows, n_cols=other.n_cols, rows=tuple(rows))

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix(n_rows=self.n_cols, n_cols=self.n_rows, rows=tuple(self.columns()))

    def bilinear(self, x: int, y: int) -> int:
        """x^T M y over GF(2), on raw bit patterns."""
        acc = 0
        i = 0
        while x:
            if x & 1:
                acc ^= parity(self.rows[i] & y)
            x >>= 1
            i += 1
        return acc

    def encoding(self) -> int:
        """Integer code sum(rows[i] << n_cols*i); fixes the enumeration order."""
        code = 0
        for i, row in enumerate(self.rows):
            code |= row << (self.n_cols * i)
        return code

    def rank(self) -> int:
        return len(_echelon(self.rows))

    def is_invertible(self) -> bool:
        return self.is_square and self.rank() == self.n_rows

    def inverse(self) -> "Gf2Matrix":
        if not self.is_square:
            raise PreconditionError("Only square matrices can be inverted")
        n = self.n_rows
        # augment with identity in the high bits and reduce to [I | M^-1]
        work = [row | (1 << (n + i)) for i, row in enumerate(self.rows)]
        mask = (1 << n) - 1
        for col in range(n):
            pivot = next((r for r in range(col, n) if (work[r] >> col) & 1), None)
            if pivot is None:
                raise PreconditionError("Matrix is singular over GF(2)")
            work[col], work[pivot] = work[pivot], work[col]
            for r in range(n):
                if r != col and (work[r] >> col) & 1:
                    work[r] ^= work[col]
        rows = tuple(((w >> n) & mask) for w in work)
        # rows of [I | X] give X = M^-1 read row-wise
        return Gf2Matrix(n_rows=n, n_cols=n, rows=rows)

    def is_alternating(self) -> bool:
        if not self.is_square:
            return False
        for i, row in enumerate(self.rows):
            if (row >> i) & 1:
                return False
        return self.rows == self.transpose().rows


class SymplecticBasis(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    e: Tuple[Gf2Vector, ...]
    f: Tuple[Gf2Vector, ...]

    def ordered(self) -> List[Gf2Vector]:
        return list(self.e) + list(self.f)

    def pairs(self) -> List[Tuple[Gf2Vector, Gf2Vector]]:
        return list(zip(self.e, self.f))


def _same_dim(a: int, b: int) -> None:
    if a != b:
        raise InvalidInputError(f"Dimension mismatch: {a} vs {b}")


def _echelon(rows: Iterable[int]) -> Dict[int, int]:
    """
    Reduced row echelon form keyed by pivot column. Returns {pivot_col: row}.

    Each stored row has its pivot as lowest set bit and zeros in every other
    pivot column, so an incoming row is reduced with one XOR per pivot column
    it touches. A new pivot is cleared from the stored rows with one whole-int
    XOR per row.
    """
    pivots: Dict[int, int] = {}
    for row in rows:
        reduced = row
        scan = row
        while scan:
            low = scan & -scan
            hit = pivots.get(low.bit_length() - 1)
            if hit is not None:
                reduced ^= hit
            scan ^= low
        if not reduced:
            continue
        low = reduced & -reduced
        for col, other in list(pivots.items()):
            if other & low:
                pivots[col] = other ^ reduced
        pivots[low.bit_length() - 1] = reduced
    return pivots


def solve_linear(a: Gf2Matrix, b: Gf2Vector) -> Optional[Gf2Vector]:
    """
    Solve A x = b over GF(2).

    The right-hand side rides in bit n_cols of each augmented row. Duplicate
    and zero rows are dropped, then the rest is brought to reduced echelon form
    pivoting on the lowest set bit; a pivot on the rhs bit means the system is
    inconsistent. With every free column set to 0, each pivot variable is the
    rhs bit of its row, which gives the canonical solution.

    Returns:
        The canonical solution, or None if the system is inconsistent.
    """
    if a.n_rows != b.n:
        raise InvalidInputError(f"Matrix has {a.n_rows} rows but rhs has length {b.n}")
    c = a.n_cols
    rhs_bit = 1 << c
    augmented = dict.fromkeys(
        row | rhs_bit if flag == "1" else row for row, flag in zip(a.rows, _bit_string(b.bits, b.n))
    )
    augmented.pop(0, None)
    pivots = _echelon(augmented)
    if c in pivots:
        logger.debug("Inconsistent %dx%d system (rank %d)", a.n_rows, c, len(pivots) - 1)
        return None

    x = 0
    for col, row in pivots.items():
        if row & rhs_bit:
            x |= 1 << col
    logger.debug("Solved %dx%d system, rank %d", a.n_rows, c, len(pivots))
    solution = Gf2Vector(n=c, bits=x)
    if a.apply_bits(x) != b.bits:
        raise VerificationError("Back substitution produced a non-solution")
    return solution


def nullspace(a: Gf2Matrix) -> List[Gf2Vector]:
    """Basis of {x : A x = 0}, one vector per free column in increasing order."""
    c = a.n_cols
    pivots = _echelon(a.rows)
    basis = []
    for free in range(c):
        if free in pivots:
            continue
        x = 1 << free
        for col, row in pivots.items():
            if (row >> free) & 1:
                x |= 1 << col
        basis.append(Gf2Vector(n=c, bits=x))
    return basis


def radical(b: Gf2Matrix) -> List[Gf2Vector]:
    """Basis of the radical of an alternating form; empty iff non-degenerate."""
    if not b.is_alternating():
        raise InvalidInputError("Radical is only defined here for alternating forms")
    return nullspace(b)


def symplectic_basis(b: Gf2Matrix) -> SymplecticBasis:
    """
    Symplectic Gram-Schmidt on a non-degenerate alternating form.

    At every step the remaining candidates are scanned in increasing integer
    encoding: e is the smallest, f the smallest with B(e, f) = 1, and the rest
    are projected onto the orthogonal complement of <e, f>.

    Returns:
        Basis (e_1..e_m, f_1..f_m) whose Gram matrix is standard symplectic.
    """
    n = b.n_rows
    if not b.is_alternating():
        raise PreconditionError("Symplectic basis needs an alternating form")
    if n % 2:
        raise PreconditionError(f"Odd dimension {n} admits no symplectic basis")
    candidates = [1 << i for i in range(n)]
    es: List[int] = []
    fs: List[int] = []
    while candidates:
        candidates.sort()
        e = candidates.pop(0)
        f = next((v for v in candidates if b.bilinear(e, v)), None)
        if f is None:
            raise PreconditionError("Form is degenerate: no symplectic partner found")
        candidates.remove(f)
        projected = []
        for v in candidates:
            v ^= (e if b.bilinear(v, f) else 0) ^ (f if b.bilinear(v, e) else 0)
            if v:
                projected.append(v)
        candidates = projected
        es.append(e)
        fs.append(f)
    if len(es) * 2 != n:
        raise PreconditionError("Form is degenerate: basis does not span")
    basis = SymplecticBasis(
        m=len(es),
        e=tuple(Gf2Vector(n=n, bits=v) for v in es),
        f=tuple(Gf2Vector(n=n, bits=v) for v in fs),
    )
    check_symplectic(b, basis)
    return basis


def check_symplectic(b: Gf2Matrix, basis: SymplecticBasis) -> None:
    for j, (ej, fj) in enumerate(basis.pairs()):
        for k, (ek, fk) in enumerate(basis.pairs()):
            if b.bilinear(ej.bits, ek.bits) or b.bilinear(fj.bits, fk.bits):
                raise VerificationError(f"Gram matrix off-diagonal block nonzero at ({j}, {k})")
            if b.bilinear(ej.bits, fk.bits) != int(j == k):
                raise VerificationError(f"B(e_{j + 1}, f_{k + 1}) is wrong")


def standard_hyperbolic(m: int) -> Gf2Matrix:
    """Polar form of q1^m: coordinates (2j, 2j+1) form hyperbolic pairs."""
    rows = []
    for i in range(2 * m):
        rows.append(1 << (i ^ 1))
    return Gf2Matrix(n_rows=2 * m, n_cols=2 * m, rows=tuple(rows))


def enumerate_invertible(n: int) -> Iterator[Gf2Matrix]:
    """Every invertible n x n matrix once, in increasing encoding order."""
    if n > HARD_MAX_GL_N:
        raise CapExceededError(f"Full GL({n}, 2) enumeration is capped at n <= {HARD_MAX_GL_N}")
    if n < 0:
        raise InvalidInputError("Dimension must be non-negative")
    mask = (1 << n) - 1
    for code in range(1 << (n * n)):
        rows = [(code >> (n * i)) & mask for i in range(n)]
        if len(_echelon(rows)) == n:
            yield Gf2Matrix(n_rows=n, n_cols=n, rows=tuple(rows))


def gl_order(n: int) -> int:
    order = 1
    for i in range(n):
        order *= (1 << n) - (1 << i)
    return order


def symplectic_group(m: int) -> List[Gf2Matrix]:
    """Maps f with f^T B f = B for the standard hyperbolic B on Z_2^{2m}."""
    b = standard_hyperbolic(m)
    group = []
    for f in enumerate_invertible(2 * m):
        cols = f.columns()
        if all(
            b.bilinear(cols[i], cols[j]) == b.entry(i, j)
            for i in range(2 * m)
            for j in range(i + 1, 2 * m)
        ):
            group.append(f)
    return group


def random_invertible(n: int, rng: random.Random) -> Gf2Matrix:
    while True:
        rows = [rng.getrandbits(n) if n else 0 for _ in range(n)]
        if len(_echelon(rows)) == n:
            return Gf2Matrix(n_rows=n, n_cols=n, rows=tuple(rows))
