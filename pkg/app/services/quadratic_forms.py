# app/services/quadratic_forms.py
"""
Quadratic forms q: Z_2^n -> {+1, -1} in additive form.

A form is stored as Q(x) = sum a_i x_i + sum_{i<j} b_ij x_i x_j over GF(2) with
q(x) = (-1)^Q(x). Q(0) = 0 and the {+1, -1} range are therefore structural.
Over GF(2) x^2 = x, so the exponent x^2 + xy + y^2 of q2 is stored as
Q2 = x + xy + y (linear (1, 1), quad b_12 = 1).
"""

from __future__ import annotations
import logging
from itertools import product
from typing import Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..config import HARD_MAX_FORM_DIM
from ..errors import CapExceededError, InvalidInputError, PreconditionError, VerificationError
from .gf2_core import (
    Gf2Matrix,
    Gf2Vector,
    SymplecticBasis,
    enumerate_invertible,
    parity,
    radical,
    symplectic_basis,
    symplectic_group,
)

logger = logging.getLogger(__name__)

BlockLabel = Literal["q1", "q2"]

# q2 + q2 -> q1 + q1: columns e1=(1,0,1,0), f1=(1,0,0,1), e2=(0,1,1,1), f2=(1,1,1,1)
# in coordinates (x1, y1, x2, y2); pullback(q2 + q2, this) == q1 + q1.
Q2Q2_TO_Q1Q1_ROWS: Tuple[int, ...] = (0b1011, 0b1100, 0b1101, 0b1110)

# local basis change per hyperbolic pair, keyed by (Q(e), Q(f))
_PAIR_NORMALIZATION = {
    (0, 0): ("q1", lambda e, f: (e, f)),
    (1, 0): ("q1", lambda e, f: (e ^ f, f)),
    (0, 1): ("q1", lambda e, f: (e, e ^ f)),
    (1, 1): ("q2", lambda e, f: (e, f)),
}


class QuadraticForm(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    linear: Gf2Vector
    quad: Gf2Matrix

    @model_validator(mode="after")
    def _check_layout(self) -> "QuadraticForm":
        if self.linear.n != self.n:
            raise ValueError(f"Linear part has length {self.linear.n}, expected {self.n}")
        if self.quad.n_rows != self.n or self.quad.n_cols != self.n:
            raise ValueError(f"Quadratic part must be {self.n}x{self.n}")
        for i, row in enumerate(self.quad.rows):
            if row & ((1 << (i + 1)) - 1):
                raise ValueError("Quadratic coefficients must be strictly upper triangular")
        return self

    @classmethod
    def from_coefficients(
        cls, n: int, linear: int, pairs: Sequence[Tuple[int, int]] = ()
    ) -> "QuadraticForm":
        """Build from a linear bit pattern and 0-based (i, j), i < j, quadratic pairs."""
        rows = [0] * n
        for i, j in pairs:
            if not 0 <= i < j < n:
                raise InvalidInputError(f"Quadratic pair ({i}, {j}) is not 0 <= i < j < {n}")
            rows[i] ^= 1 << j
        return cls(n=n, linear=Gf2Vector(n=n, bits=linear), quad=Gf2Matrix.from_rows(rows, n))

    def value(self, x: int) -> int:
        """Additive value Q(x) in {0, 1} at a raw bit pattern."""
        acc = parity(self.linear.bits & x)
        i = 0
        y = x
        while y:
            if y & 1:
                acc ^= parity(self.quad.rows[i] & x)
            y >>= 1
            i += 1
        return acc

    def pairs(self) -> List[Tuple[int, int]]:
        out = []
        for i, row in enumerate(self.quad.rows):
            for j in range(i + 1, self.n):
                if (row >> j) & 1:
                    out.append((i, j))
        return out


class FormClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    arf: int


class Decomposition(BaseModel):
    model_config = ConfigDict(frozen=True)

    form_class: FormClass
    blocks: Tuple[BlockLabel, ...]
    basis_change: Gf2Matrix


class ClassCount(BaseModel):
    dim: int
    arf0: int
    arf1: int
    classes: int
    orbits: Optional[int] = None
    orbits_verified: bool = False


# ---------- constructors ----------

def trivial_form(n: int) -> QuadraticForm:
    return QuadraticForm.from_coefficients(n, 0)


def canonical_q1() -> QuadraticForm:
    return QuadraticForm.from_coefficients(2, 0b00, [(0, 1)])


def canonical_q2() -> QuadraticForm:
    return QuadraticForm.from_coefficients(2, 0b11, [(0, 1)])


def block_form(label: BlockLabel) -> QuadraticForm:
    return canonical_q1() if label == "q1" else canonical_q2()


def canonical_blocks(m: int, arf_value: int) -> List[BlockLabel]:
    if m == 0:
        if arf_value:
            raise PreconditionError("The zero-dimensional form has Arf invariant 0")
        return []
    return ["q1"] * m if arf_value == 0 else ["q1"] * (m - 1) + ["q2"]


def canonical_form(m: int, arf_value: int) -> QuadraticForm:
    """q1^m if arf = 0, else q1^(m-1) + q2."""
    return direct_sum_all([block_form(b) for b in canonical_blocks(m, arf_value)])


# ---------- evaluation ----------

def evaluate(q: QuadraticForm, x: Gf2Vector | int) -> int:
    if isinstance(x, Gf2Vector):
        if x.n != q.n:
            raise InvalidInputError(f"Point of dimension {x.n} for a form on Z_2^{q.n}")
        x = x.bits
    return -1 if q.value(x) else 1


def values_table(q: QuadraticForm) -> np.ndarray:
    """Q(x) for every x in increasing encoding, as a uint8 array of length 2^n."""
    size = 1 << q.n
    xs = np.arange(size, dtype=np.int64)
    bits = (xs[:, None] >> np.arange(q.n)) & 1
    coeffs = np.zeros((q.n, q.n), dtype=np.int64)
    for i, j in q.pairs():
        coeffs[i, j] = 1
    linear = np.array(q.linear.coords(), dtype=np.int64)
    out = (bits @ linear) + np.einsum("xi,ij,xj->x", bits, coeffs, bits)
    return (out & 1).astype(np.uint8)


def polar_form(q: QuadraticForm) -> Gf2Matrix:
    """B = quad + quad^T, so B(x, y) = Q(x+y) + Q(x) + Q(y)."""
    t = q.quad.transpose()
    return Gf2Matrix(n_rows=q.n, n_cols=q.n, rows=tuple(a ^ b for a, b in zip(q.quad.rows, t.rows)))


def is_nondegenerate(q: QuadraticForm) -> bool:
    return not radical(polar_form(q))


def gauss_sum(q: QuadraticForm) -> int:
    ones = int(values_table(q).sum())
    return (1 << q.n) - 2 * ones


def _require_classifiable(q: QuadraticForm) -> Gf2Matrix:
    if q.n % 2:
        raise PreconditionError(f"Form on Z_2^{q.n} has odd dimension")
    b = polar_form(q)
    rad = radical(b)
    if rad:
        raise PreconditionError(
            f"Form is degenerate; radical spanned by {[v.bits for v in rad]}"
        )
    return b


def arf(q: QuadraticForm) -> int:
    b = _require_classifiable(q)
    basis = symplectic_basis(b)
    return sum(q.value(e.bits) & q.value(f.bits) for e, f in basis.pairs()) & 1


# ---------- constructions ----------

def direct_sum(q: QuadraticForm, r: QuadraticForm) -> QuadraticForm:
    """Block-diagonal layout: r's coordinates follow q's."""
    shift = q.n
    pairs = q.pairs() + [(i + shift, j + shift) for i, j in r.pairs()]
    linear = q.linear.bits | (r.linear.bits << shift)
    return QuadraticForm.from_coefficients(q.n + r.n, linear, pairs)


def direct_sum_all(forms: Sequence[QuadraticForm]) -> QuadraticForm:
    out = trivial_form(0)
    for q in forms:
        out = direct_sum(out, q)
    return out


def pullback(q: QuadraticForm, f: Gf2Matrix) -> QuadraticForm:
    """The form x -> Q(f x), re-expressed in coefficients."""
    if not f.is_square or f.n_rows != q.n:
        raise InvalidInputError(f"Map of shape {f.n_rows}x{f.n_cols} does not act on Z_2^{q.n}")
    if not f.is_invertible():
        raise PreconditionError("Pullback needs an invertible map")
    images = f.columns()
    b = polar_form(q)
    linear = 0
    pairs = []
    for i, u in enumerate(images):
        if q.value(u):
            linear |= 1 << i
        for j in range(i + 1, q.n):
            if b.bilinear(u, images[j]):
                pairs.append((i, j))
    return QuadraticForm.from_coefficients(q.n, linear, pairs)


def agree_everywhere(q: QuadraticForm, r: QuadraticForm) -> bool:
    return q.n == r.n and bool(np.array_equal(values_table(q), values_table(r)))


def form_from_table(values: Sequence[int]) -> Optional[QuadraticForm]:
    """
    Interpolate a quadratic form from its 2^n values in {+1, -1}.

    Returns:
        The form, or None if values[0] != +1 or the table is not quadratic.
    """
    size = len(values)
    if size == 0 or size & (size - 1):
        raise InvalidInputError(f"Table length {size} is not a power of 2")
    if any(v not in (1, -1) for v in values):
        raise InvalidInputError("Table entries must be +1 or -1")
    n = size.bit_length() - 1
    if values[0] != 1:
        return None
    logs = [0 if v == 1 else 1 for v in values]
    linear = 0
    pairs = []
    for i in range(n):
        if logs[1 << i]:
            linear |= 1 << i
    for i in range(n):
        for j in range(i + 1, n):
            if logs[(1 << i) | (1 << j)] ^ logs[1 << i] ^ logs[1 << j]:
                pairs.append((i, j))
    q = QuadraticForm.from_coefficients(n, linear, pairs)
    if not np.array_equal(values_table(q), np.array(logs, dtype=np.uint8)):
        logger.debug("Table of size %d is not quadratic", size)
        return None
    return q


# ---------- classification ----------

def hyperbolic_type(qe: int, qf: int) -> BlockLabel:
    return _PAIR_NORMALIZATION[(qe, qf)][0]


def _normalize_pair(q: QuadraticForm, e: int, f: int) -> Tuple[BlockLabel, int, int]:
    label, change = _PAIR_NORMALIZATION[(q.value(e), q.value(f))]
    e2, f2 = change(e, f)
    return label, e2, f2


def _merge_q2_pairs(p: Tuple[int, int], r: Tuple[int, int]) -> List[Tuple[int, int]]:
    """Two q2-type pairs -> two q1-type pairs, by the embedded basis change."""
    coords = (p[0], p[1], r[0], r[1])
    m = Gf2Matrix.from_rows(Q2Q2_TO_Q1Q1_ROWS, 4)
    new = []
    for col in m.columns():
        v = 0
        for k in range(4):
            if (col >> k) & 1:
                v ^= coords[k]
        new.append(v)
    return [(new[0], new[1]), (new[2], new[3])]


def canonical_decomposition(q: QuadraticForm) -> Decomposition:
    """
    Reduce q to q1^m or q1^(m-1) + q2 with a verified basis change.

    Symplectic basis first, then each hyperbolic pair is normalized by the
    local table; q2-type pairs are merged two at a time into q1-type pairs.

    Returns:
        Decomposition whose basis_change P satisfies pullback(q, P) == canonical form.
    """
    b = _require_classifiable(q)
    m = q.n // 2
    if m == 0:
        raise PreconditionError("Decomposition needs m >= 1")
    basis: SymplecticBasis = symplectic_basis(b)
    q1_pairs: List[Tuple[int, int]] = []
    pending: List[Tuple[int, int]] = []
    for e, f in basis.pairs():
        label, e2, f2 = _normalize_pair(q, e.bits, f.bits)
        if label == "q1":
            q1_pairs.append((e2, f2))
            continue
        pending.append((e2, f2))
        if len(pending) == 2:
            q1_pairs.extend(_merge_q2_pairs(pending[0], pending[1]))
            pending = []
    blocks: List[BlockLabel] = ["q1"] * len(q1_pairs) + ["q2"] * len(pending)
    columns = [v for pair in q1_pairs + pending for v in pair]
    p = Gf2Matrix.from_columns(columns, q.n)
    arf_value = len(pending)
    target = canonical_form(m, arf_value)
    if not agree_everywhere(pullback(q, p), target):
        raise VerificationError("Canonical decomposition basis change failed verification")
    logger.debug("Decomposed form on Z_2^%d as %s", q.n, blocks)
    return Decomposition(
        form_class=FormClass(m=m, arf=arf_value), blocks=tuple(blocks), basis_change=p
    )


def equivalence_witness(q: QuadraticForm, r: QuadraticForm) -> Optional[Gf2Matrix]:
    """
    Some invertible f with q = pullback(r, f), or None when (dim, arf) differ.
    """
    _require_classifiable(q)
    _require_classifiable(r)
    if q.n != r.n:
        return None
    if q.n == 0:
        return Gf2Matrix.identity(0)
    dq = canonical_decomposition(q)
    dr = canonical_decomposition(r)
    if dq.form_class != dr.form_class:
        return None
    # q(P x) = canon(x) = r(P' x)  =>  q(x) = r(P' P^-1 x)
    f = dr.basis_change @ dq.basis_change.inverse()
    if not agree_everywhere(q, pullback(r, f)):
        raise VerificationError("Equivalence witness failed verification")
    return f


def standard_polar_forms(m: int) -> Iterator[QuadraticForm]:
    """All 2^(2m) forms whose polar is the standard hyperbolic form."""
    pairs = [(2 * j, 2 * j + 1) for j in range(m)]
    for linear in range(1 << (2 * m)):
        yield QuadraticForm.from_coefficients(2 * m, linear, pairs)


def enumerate_classes(dim: int, orbits: bool = True, max_dim: int = HARD_MAX_FORM_DIM) -> ClassCount:
    """
    Count forms with standard polar by Arf value; for dim <= 4 also count
    orbits under the polar-preserving subgroup of GL(dim, 2).
    """
    if dim % 2 or dim < 2:
        raise InvalidInputError(f"Dimension {dim} must be even and at least 2")
    if dim > min(max_dim, HARD_MAX_FORM_DIM):
        raise CapExceededError(f"Dimension {dim} exceeds the enumeration cap {min(max_dim, HARD_MAX_FORM_DIM)}")
    m = dim // 2
    counts = [0, 0]
    for q in standard_polar_forms(m):
        counts[arf(q)] += 1
    classes = sum(1 for c in counts if c)
    result = ClassCount(dim=dim, arf0=counts[0], arf1=counts[1], classes=classes)
    if orbits and dim <= 4:
        orbit_count, consistent = _orbit_check(m)
        result.orbits = orbit_count
        result.orbits_verified = consistent and orbit_count == classes
    return result


def _orbit_check(m: int) -> Tuple[int, bool]:
    forms = list(standard_polar_forms(m))
    group = symplectic_group(m)
    logger.debug("Sp(%d, 2) has %d elements", 2 * m, len(group))
    seen: dict[int, int] = {}
    orbit_arfs: List[int] = []
    for q in forms:
        if q.linear.bits in seen:
            continue
        label = len(orbit_arfs)
        orbit_arfs.append(arf(q))
        for g in group:
            image = pullback(q, g)
            if image.quad != q.quad:
                raise VerificationError("Polar-preserving map changed the polar form")
            seen.setdefault(image.linear.bits, label)
    consistent = all(arf(q) == orbit_arfs[seen[q.linear.bits]] for q in forms)
    return len(orbit_arfs), consistent


def find_q2q2_to_q1q1() -> Gf2Matrix:
    """Brute-force search over GL(4, 2) for f with pullback(q2 + q2, f) = q1 + q1."""
    source = direct_sum(canonical_q2(), canonical_q2())
    target = direct_sum(canonical_q1(), canonical_q1())
    for f in enumerate_invertible(4):
        if pullback(source, f) == target:
            return f
    raise VerificationError("No basis change from q2 + q2 to q1 + q1 exists in GL(4, 2)")


def all_forms(n: int) -> Iterator[QuadraticForm]:
    """Every quadratic form on Z_2^n (2^(n + n(n-1)/2) of them)."""
    slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for linear in range(1 << n):
        for mask in product((0, 1), repeat=len(slots)):
            yield QuadraticForm.from_coefficients(n, linear, [s for s, bit in zip(slots, mask) if bit])
