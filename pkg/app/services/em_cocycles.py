# app/services/em_cocycles.py
"""
{+1, -1}-valued normalized 2- and 3-cochains on Z_2^n, stored as GF(2) logs.

Tables are numpy uint8 arrays indexed [x, y] or [x, y, z]; the flat file order
x + 2^n y (+ 2^2n z) is the Fortran-order ravel of that array. The group law is
XOR on integer encodings, so every identity below is linear over GF(2):

    delta h(x,y,z) = h(y,z) + h(x+y,z) + h(x,y+z) + h(x,y)
    cocycle:         w(y,z,t) + w(x,y+z,t) + w(x,y,z) + w(x+y,z,t) + w(x,y,z+t) = 0
    hexagon 1:       c(x+y,z) + c(x,z) + c(y,z) + w(x,y,z) + w(z,x,y) + w(x,z,y) = 0
    hexagon 2:       c(x,y+z) + c(x,y) + c(x,z) + w(y,x,z) + w(x,y,z) + w(y,z,x) = 0

The diagonal value w(g,g,g) is a class invariant: for a normalized coboundary
delta h(g,g,g) = h(g,g) + h(0,g) + h(g,0) + h(g,g) = 0. On Z_2 the nontrivial
class has diagonal -1, so the diagonal detects the restriction of [w] to <g>.
"""

from __future__ import annotations
import base64
import logging
import random
from dataclasses import dataclass
from itertools import combinations, product
from math import comb, lcm
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..config import get_settings
from ..errors import CapExceededError, InvalidInputError, PreconditionError, VerificationError
from .gf2_core import Gf2Matrix, Gf2Vector, solve_linear
from .quadratic_forms import QuadraticForm, form_from_table

logger = logging.getLogger(__name__)


# ---------- types ----------

def _freeze(values: np.ndarray, n: int, arity: int) -> np.ndarray:
    size = 1 << n
    arr = np.ascontiguousarray(values, dtype=np.uint8) & 1
    if arr.shape != (size,) * arity:
        raise InvalidInputError(f"Expected a table of shape {(size,) * arity}, got {arr.shape}")
    for axis in range(arity):
        if np.take(arr, 0, axis=axis).any():
            raise InvalidInputError("Cochain is not normalized: nonzero value with a 0 argument")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cochain2:
    n: int
    values: np.ndarray  # [x, y] -> log

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _freeze(self.values, self.n, 2))

    @classmethod
    def trivial(cls, n: int) -> "Cochain2":
        size = 1 << n
        return cls(n, np.zeros((size, size), dtype=np.uint8))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "Cochain2":
        size = 1 << n
        raw = np.array([rng.getrandbits(1) for _ in range(size * size)], dtype=np.uint8)
        table = raw.reshape(size, size)
        table[0, :] = 0
        table[:, 0] = 0
        return cls(n, table)

    def at(self, x: int, y: int) -> int:
        return int(self.values[x, y])

    def sign(self, x: int, y: int) -> int:
        return -1 if self.values[x, y] else 1

    def flat(self) -> np.ndarray:
        return self.values.ravel(order="F")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cochain2) and self.n == other.n and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class Cochain3:
    n: int
    values: np.ndarray  # [x, y, z] -> log

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _freeze(self.values, self.n, 3))

    @classmethod
    def trivial(cls, n: int) -> "Cochain3":
        size = 1 << n
        return cls(n, np.zeros((size, size, size), dtype=np.uint8))

    def at(self, x: int, y: int, z: int) -> int:
        return int(self.values[x, y, z])

    def flat(self) -> np.ndarray:
        return self.values.ravel(order="F")

    def flipped(self, x: int, y: int, z: int) -> "Cochain3":
        """Copy with one entry negated (used to build corrupted inputs)."""
        table = self.values.copy()
        table[x, y, z] ^= 1
        return Cochain3(self.n, table)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cochain3) and self.n == other.n and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class EmPair:
    omega: Cochain3
    c: Cochain2

    def __post_init__(self) -> None:
        if self.omega.n != self.c.n:
            raise InvalidInputError(f"Associator on Z_2^{self.omega.n} with braiding on Z_2^{self.c.n}")

    @property
    def n(self) -> int:
        return self.c.n


class HwyParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    a_r: Tuple[int, ...]
    a_rs: Tuple[int, ...] = ()
    a_rst: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_sizes(self) -> "HwyParams":
        expected = (self.n, comb(self.n, 2), comb(self.n, 3))
        got = (len(self.a_r), len(self.a_rs), len(self.a_rst))
        if got != expected:
            raise ValueError(f"Parameter lengths {got} do not match {expected} for n={self.n}")
        if any(a not in (0, 1) for a in self.a_r + self.a_rs + self.a_rst):
            raise ValueError("Parameters must be bits")
        return self

    @classmethod
    def zero(cls, n: int) -> "HwyParams":
        return cls(n=n, a_r=(0,) * n, a_rs=(0,) * comb(n, 2), a_rst=(0,) * comb(n, 3))

    def is_zero(self) -> bool:
        return not any(self.a_r + self.a_rs + self.a_rst)


class RestrictionVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    entries: Tuple[int, ...]  # lambda_<g> for g = 1 .. 2^n - 1

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.entries)


@dataclass(frozen=True)
class FsexpCertificate:
    h: Cochain2


# ---------- caps ----------

def _check_scan(n: int) -> None:
    cap = get_settings().max_scan_n
    if n > cap:
        raise CapExceededError(f"Exhaustive 2^(4n) scans are capped at n <= {cap}, got n={n}")


def _check_solver(n: int) -> None:
    cap = get_settings().max_solver_n
    if n > cap:
        raise CapExceededError(f"Cochain solvers are capped at n <= {cap}, got n={n}")


def _grid(n: int, arity: int) -> List[np.ndarray]:
    """Open broadcast index grids, one per argument."""
    return list(np.ix_(*([np.arange(1 << n)] * arity)))


# ---------- coboundary / cocycle checks ----------

def _delta_values(h: np.ndarray, n: int) -> np.ndarray:
    x, y, z = _grid(n, 3)
    return h[y, z] ^ h[x ^ y, z] ^ h[x, y ^ z] ^ h[x, y]


def delta2(h: Cochain2) -> Cochain3:
    return Cochain3(h.n, _delta_values(h.values, h.n))


def _cocycle_defect(w: np.ndarray, n: int) -> bool:
    """True if some quadruple violates the cocycle identity; scans one x-slab at a time."""
    _, y, z, t = _grid(n, 4)
    y, z, t = y[0], z[0], t[0]
    for x in range(1 << n):
        slab = w[y, z, t] ^ w[x, y ^ z, t] ^ w[x, y, z] ^ w[x ^ y, z, t] ^ w[x, y, z ^ t]
        if slab.any():
            return True
    return False


def is_cocycle3(omega: Cochain3) -> bool:
    _check_scan(omega.n)
    return not _cocycle_defect(omega.values, omega.n)


def _hexagon_defects(omega: Cochain3, c: Cochain2) -> Tuple[np.ndarray, np.ndarray]:
    w, cv = omega.values, c.values
    x, y, z = _grid(c.n, 3)
    first = cv[x ^ y, z] ^ cv[x, z] ^ cv[y, z] ^ w[x, y, z] ^ w[z, x, y] ^ w[x, z, y]
    second = cv[x, y ^ z] ^ cv[x, y] ^ cv[x, z] ^ w[y, x, z] ^ w[x, y, z] ^ w[y, z, x]
    return first, second


def check_hexagons(omega: Cochain3, c: Cochain2) -> bool:
    if omega.n != c.n:
        raise InvalidInputError(f"Associator on Z_2^{omega.n} with braiding on Z_2^{c.n}")
    first, second = _hexagon_defects(omega, c)
    ok = not first.any() and not second.any()
    if not ok:
        bad = np.argwhere(first | second)[0]
        logger.debug("Hexagon violated at triple %s", tuple(int(v) for v in bad))
    return ok


def is_valid_pair(pair: EmPair) -> bool:
    return is_cocycle3(pair.omega) and check_hexagons(pair.omega, pair.c)


def _require_cocycle(omega: Cochain3) -> None:
    # the trivial table is a cocycle at every n; anything else needs the capped scan
    if not omega.values.any():
        return
    if not is_cocycle3(omega):
        raise PreconditionError("Table is not a 3-cocycle")


def _require_valid_pair(pair: EmPair) -> None:
    _require_cocycle(pair.omega)
    if not check_hexagons(pair.omega, pair.c):
        raise PreconditionError("Pair violates the hexagon identities")


# ---------- traces and forms ----------

def trace(pair: EmPair) -> QuadraticForm:
    """q(x) = c(x, x), interpolated as a quadratic form."""
    _require_valid_pair(pair)
    diagonal = np.diagonal(pair.c.values)
    q = form_from_table([-1 if v else 1 for v in diagonal])
    if q is None:
        raise VerificationError("Trace of a valid pair is not a quadratic form")
    return q


def _bilinear_table(n: int, coeffs: np.ndarray) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    bits = (xs[:, None] >> np.arange(n)) & 1
    return ((bits @ coeffs @ bits.T) & 1).astype(np.uint8)


def cocycle_from_form(q: QuadraticForm) -> EmPair:
    """
    (1, c_beta) with beta(x, y) = sum a_i x_i y_i + sum_{i<j} b_ij x_i y_j,
    a bilinear form with beta(x, x) = Q(x).
    """
    coeffs = np.zeros((q.n, q.n), dtype=np.int64)
    for i, a in enumerate(q.linear.coords()):
        coeffs[i, i] = a
    for i, j in q.pairs():
        coeffs[i, j] = 1
    c = Cochain2(q.n, _bilinear_table(q.n, coeffs))
    return EmPair(Cochain3.trivial(q.n), c)


def coboundary_pair(h: Cochain2) -> EmPair:
    """The EM coboundary (delta h, h(x,y)/h(y,x))."""
    return EmPair(delta2(h), Cochain2(h.n, h.values ^ h.values.T))


def braiding_monodromy(pair: EmPair) -> np.ndarray:
    """c(x,y) c(y,x) as a log table; equals the polar form of the trace."""
    return pair.c.values ^ pair.c.values.T


# ---------- pullbacks and products ----------

def _map_table(f: Gf2Matrix, n: int) -> np.ndarray:
    if not f.is_square or f.n_rows != n:
        raise InvalidInputError(f"Map of shape {f.n_rows}x{f.n_cols} does not act on Z_2^{n}")
    if not f.is_invertible():
        raise PreconditionError("Pullback needs an invertible map")
    return np.array([f.apply_bits(x) for x in range(1 << n)], dtype=np.int64)


def pullback_cochain2(mu: Cochain2, f: Gf2Matrix) -> Cochain2:
    image = _map_table(f, mu.n)
    return Cochain2(mu.n, mu.values[np.ix_(image, image)])


def pullback_cochain3(omega: Cochain3, f: Gf2Matrix) -> Cochain3:
    image = _map_table(f, omega.n)
    return Cochain3(omega.n, omega.values[np.ix_(image, image, image)])


def pullback_pair(pair: EmPair, f: Gf2Matrix) -> EmPair:
    return EmPair(pullback_cochain3(pair.omega, f), pullback_cochain2(pair.c, f))


def _split(n1: int, n2: int) -> Tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << (n1 + n2))
    return idx & ((1 << n1) - 1), idx >> n1


def product_pair(first: EmPair, second: EmPair) -> EmPair:
    """
    Cocycle of the Deligne product on G + G' (second factor in the high bits):
    w((x1,x2),(y1,y2),(z1,z2)) = w1(x1,y1,z1) w2(x2,y2,z2), likewise c = c1 c2.
    """
    low, high = _split(first.n, second.n)
    w1, w2 = first.omega.values, second.omega.values
    c1, c2 = first.c.values, second.c.values
    omega = w1[np.ix_(low, low, low)] ^ w2[np.ix_(high, high, high)]
    c = c1[np.ix_(low, low)] ^ c2[np.ix_(high, high)]
    n = first.n + second.n
    return EmPair(Cochain3(n, omega), Cochain2(n, c))


# ---------- linear solving ----------

def _unknown_index(n: int):
    width = (1 << n) - 1
    return lambda x, y: (x - 1) + width * (y - 1)


def _delta_rows(n: int) -> List[int]:
    """One row per triple of nonzero arguments: the unknowns of delta mu there."""
    size = 1 << n
    var = _unknown_index(n)
    rows = []
    for z in range(1, size):
        for y in range(1, size):
            for x in range(1, size):
                row = 1 << var(y, z)
                row ^= 1 << var(x, y)
                if x ^ y:
                    row ^= 1 << var(x ^ y, z)
                if y ^ z:
                    row ^= 1 << var(x, y ^ z)
                rows.append(row)
    return rows


def _rhs_triples(w: np.ndarray) -> List[int]:
    # z-major, then y, then x: matches _delta_rows
    return [int(v) for v in w[1:, 1:, 1:].ravel(order="F")]


def _table_from_solution(n: int, x: Gf2Vector) -> Cochain2:
    size = 1 << n
    table = np.zeros((size, size), dtype=np.uint8)
    var = _unknown_index(n)
    for b in range(1, size):
        for a in range(1, size):
            table[a, b] = (x.bits >> var(a, b)) & 1
    return Cochain2(n, table)


def trivialize(omega: Cochain3) -> Optional[Cochain2]:
    """
    Solve delta h = omega for a normalized h.

    Returns:
        The canonical h (free unknowns 0), or None if [omega] is nontrivial.
    """
    _check_solver(omega.n)
    _require_cocycle(omega)
    n = omega.n
    if n == 0:
        return Cochain2.trivial(0)
    unknowns = ((1 << n) - 1) ** 2
    rows = _delta_rows(n)
    rhs = _rhs_triples(omega.values)
    a = Gf2Matrix.from_rows(rows, unknowns)
    b = Gf2Vector.from_coords(rhs)
    x = solve_linear(a, b)
    if x is None:
        return None
    h = _table_from_solution(n, x)
    if delta2(h) != omega:
        raise VerificationError("Trivializing cochain failed verification")
    logger.debug("Trivialized a 3-cocycle on Z_2^%d", n)
    return h


def coboundary_witness(pair: EmPair, other: EmPair) -> Optional[Cochain2]:
    """
    Find mu with other.omega = pair.omega + delta mu and
    other.c(x,y) = pair.c(x,y) + mu(x,y) + mu(y,x).

    Returns:
        The canonical mu, or None when the pairs are not cohomologous
        (exactly when their traces differ).
    """
    if pair.n != other.n:
        raise InvalidInputError(f"Pairs live on Z_2^{pair.n} and Z_2^{other.n}")
    _check_solver(pair.n)
    _require_valid_pair(pair)
    _require_valid_pair(other)
    n = pair.n
    if n == 0:
        return Cochain2.trivial(0)
    size = 1 << n
    var = _unknown_index(n)
    rows = _delta_rows(n)
    rhs = _rhs_triples(pair.omega.values ^ other.omega.values)
    dc = pair.c.values ^ other.c.values
    for y in range(1, size):
        for x in range(1, size):
            rows.append((1 << var(x, y)) ^ (1 << var(y, x)))
            rhs.append(int(dc[x, y]))
    a = Gf2Matrix.from_rows(rows, (size - 1) ** 2)
    x_sol = solve_linear(a, Gf2Vector.from_coords(rhs))
    if x_sol is None:
        return None
    mu = _table_from_solution(n, x_sol)
    if not is_witness(pair, other, mu):
        raise VerificationError("Coboundary witness failed verification")
    return mu


def is_witness(pair: EmPair, other: EmPair, mu: Cochain2) -> bool:
    """True iff other = (pair.omega + delta mu, pair.c + mu + mu^T)."""
    shifted_omega = pair.omega.values ^ _delta_values(mu.values, mu.n)
    shifted_c = pair.c.values ^ mu.values ^ mu.values.T
    return np.array_equal(shifted_omega, other.omega.values) and np.array_equal(
        shifted_c, other.c.values
    )


# ---------- HWY family and restrictions ----------

def hwy_cocycle(p: HwyParams) -> Cochain3:
    """
    prod_r (-1)^{a_r i_r [(j_r+k_r)/2]} prod_{r<s} (-1)^{a_rs k_r [(i_s+j_s)/2]}
    prod_{r<s<t} (-1)^{a_rst k_r j_s i_t}; with bits, [(u+v)/2] = u v.
    """
    n = p.n
    x, y, z = _grid(n, 3)
    table = np.zeros((1 << n,) * 3, dtype=np.uint8)

    def bit(v: np.ndarray, r: int) -> np.ndarray:
        return ((v >> r) & 1).astype(np.uint8)

    for r, a in enumerate(p.a_r):
        if a:
            table ^= bit(x, r) & bit(y, r) & bit(z, r)
    for (r, s), a in zip(combinations(range(n), 2), p.a_rs):
        if a:
            table ^= bit(z, r) & bit(x, s) & bit(y, s)
    for (r, s, t), a in zip(combinations(range(n), 3), p.a_rst):
        if a:
            table ^= bit(z, r) & bit(y, s) & bit(x, t)
    return Cochain3(n, table)


def all_hwy_params(n: int) -> Iterator[HwyParams]:
    sizes = (n, comb(n, 2), comb(n, 3))
    for bits in product((0, 1), repeat=sum(sizes)):
        yield HwyParams(
            n=n,
            a_r=bits[: sizes[0]],
            a_rs=bits[sizes[0] : sizes[0] + sizes[1]],
            a_rst=bits[sizes[0] + sizes[1] :],
        )


def restriction_vector(omega: Cochain3) -> RestrictionVector:
    """lambda_<g> = omega(g, g, g) for every g != 0, in increasing encoding."""
    _require_cocycle(omega)
    diag = [int(omega.values[g, g, g]) for g in range(1, 1 << omega.n)]
    return RestrictionVector(n=omega.n, entries=tuple(-1 if v else 1 for v in diag))


def fs_exponent(omega: Cochain3) -> int:
    """lcm over g of ord(g) * ord(omega restricted to <g>)."""
    lam = restriction_vector(omega)
    exponent = 1
    for value in lam.entries:
        exponent = lcm(exponent, 2 * (1 if value == 1 else 2))
    return exponent


def certify_fsexp2(omega: Cochain3) -> Optional[FsexpCertificate]:
    """A verified h with delta h = omega iff FSexp(Vec^omega) = 2."""
    if omega.n < 1:
        raise PreconditionError("FSexp 2 certification needs n >= 1")
    if fs_exponent(omega) != 2:
        return None
    h = trivialize(omega)
    if h is None:
        raise VerificationError("All restrictions trivial but the cocycle did not trivialize")
    if delta2(h) != omega:
        raise VerificationError("Certificate failed verification")
    return FsexpCertificate(h=h)


# ---------- wire encoding ----------

def encode_logs(values: np.ndarray) -> str:
    flat = values.ravel(order="F").astype(np.uint8)
    return base64.b64encode(np.packbits(flat, bitorder="little").tobytes()).decode("ascii")


def decode_logs(data: str, n: int, arity: int) -> np.ndarray:
    size = 1 << n
    count = size**arity
    try:
        raw = np.frombuffer(base64.b64decode(data, validate=True), dtype=np.uint8)
    except ValueError as e:
        raise InvalidInputError(f"Log table is not valid base64: {e}")
    bits = np.unpackbits(raw, bitorder="little")
    if bits.size < count or bits[count:].any() or bits.size - count >= 8:
        raise InvalidInputError(f"Log table does not hold exactly {count} bits")
    return bits[:count].reshape((size,) * arity, order="F")
