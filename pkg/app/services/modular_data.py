# app/services/modular_data.py
"""
Pointed modular categories C(Z_2^{2m}, q) and their modular data.

Simple objects are the labels x in Z_2^{2m} (increasing integer encoding), every
dimension is +1, fusion is x + y and every label is its own dual. The S-matrix
is stored unnormalized as signs S_xy = (-1)^{B(x,y)} with B the polar form, and
T_x = q(x).
"""

from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import InvalidInputError, NotModularError, VerificationError
from .em_cocycles import (
    Cochain2,
    cocycle_from_form,
    coboundary_witness,
    is_witness,
    pullback_pair,
)
from .gf2_core import Gf2Matrix
from .quadratic_forms import (
    BlockLabel,
    QuadraticForm,
    agree_everywhere,
    arf,
    block_form,
    canonical_blocks,
    canonical_decomposition,
    direct_sum,
    direct_sum_all,
    equivalence_witness,
    is_nondegenerate,
    polar_form,
    pullback,
    trivial_form,
    values_table,
)

logger = logging.getLogger(__name__)


def _signs(logs: np.ndarray) -> np.ndarray:
    return 1 - 2 * logs.astype(np.int64)


def _label_bits(n: int) -> np.ndarray:
    xs = np.arange(1 << n, dtype=np.int64)
    return (xs[:, None] >> np.arange(n)) & 1


@dataclass(frozen=True, eq=False)
class PointedModularCategory:
    n: int
    q: QuadraticForm
    dims: np.ndarray
    S: np.ndarray
    T: np.ndarray
    tau_plus: int
    xi: int
    fsexp: int

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def labels(self) -> range:
        return range(1 << self.n)

    def __post_init__(self) -> None:
        for name in ("dims", "S", "T"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True)
class EquivalenceData:
    """Group isomorphism f and the natural-isomorphism data mu."""

    f: Gf2Matrix
    mu: Cochain2


class CategoryDescriptor(BaseModel):
    """Deligne product of rank-4 factors C(Z_2^2, q1) / C(Z_2^2, q2); m = 0 is Vec."""

    model_config = ConfigDict(frozen=True)

    m: int
    blocks: Tuple[BlockLabel, ...] = ()

    @model_validator(mode="after")
    def _check_blocks(self) -> "CategoryDescriptor":
        if len(self.blocks) != self.m:
            raise ValueError(f"Descriptor with m={self.m} needs {self.m} blocks, got {len(self.blocks)}")
        return self

    @property
    def is_trivial(self) -> bool:
        return self.m == 0

    def factors(self) -> List[str]:
        return [f"C(Z_2^2, {b})" for b in self.blocks]

    def form(self) -> QuadraticForm:
        return direct_sum_all([block_form(b) for b in self.blocks])

    def build(self) -> PointedModularCategory:
        return build_category(self.form())


class PrimeDecomposition(BaseModel):
    model_config = ConfigDict(frozen=True)

    descriptor: CategoryDescriptor
    basis_change: Gf2Matrix


# ---------- construction ----------

def trivial_category() -> PointedModularCategory:
    one = np.ones(1, dtype=np.int64)
    return PointedModularCategory(
        n=0, q=trivial_form(0), dims=one, S=np.ones((1, 1), dtype=np.int64), T=one.copy(),
        tau_plus=1, xi=1, fsexp=1,
    )


def build_category(q: QuadraticForm) -> PointedModularCategory:
    if q.n % 2:
        raise InvalidInputError(f"Label space Z_2^{q.n} has odd dimension")
    if q.n == 0:
        return trivial_category()
    if not is_nondegenerate(q):
        raise NotModularError("Degenerate quadratic form: the category is not modular")
    n = q.n
    m = n // 2
    b = polar_form(q)
    coeffs = np.array([[b.entry(i, j) for j in range(n)] for i in range(n)], dtype=np.int64)
    bits = _label_bits(n)
    S = _signs((bits @ coeffs @ bits.T) % 2)
    T = _signs(values_table(q))
    tau = int(T.sum())
    if abs(tau) != 1 << m:
        raise VerificationError(f"Gauss sum {tau} of a non-degenerate form is not +-2^{m}")
    category = PointedModularCategory(
        n=n, q=q, dims=np.ones(1 << n, dtype=np.int64), S=S, T=T,
        tau_plus=tau, xi=tau // (1 << m), fsexp=2,
    )
    logger.debug("Built pointed modular category of rank %d, tau+=%d", 1 << n, tau)
    return category


# ---------- invariants ----------

def gauss_sum_tau(c: PointedModularCategory) -> int:
    return c.tau_plus


def central_charge(c: PointedModularCategory) -> int:
    return c.xi


def global_dimension(c: PointedModularCategory) -> int:
    return int((c.dims**2).sum())


def normalized_s_matrix(c: PointedModularCategory) -> np.ndarray:
    return c.S / float(1 << c.m)


def fusion(x: int, y: int) -> int:
    return x ^ y


def dual(x: int) -> int:
    return x


def fsexp_check(c: PointedModularCategory) -> int:
    """
    FSexp of a built category. Every category built here has a +-1-valued
    nontrivial twist, so the exponent is 2; only Vec (m = 0) has exponent 1.
    """
    return 1 if c.n == 0 else 2


def verify_verlinde(c: PointedModularCategory) -> bool:
    """sum_w S_xw S_yw S_zw = 2^{2m} [z = x + y] for group fusion."""
    size = 1 << c.n
    lhs = np.einsum("xw,yw,zw->xyz", c.S, c.S, c.S)
    x, y, z = np.ix_(*([np.arange(size)] * 3))
    expected = size * ((x ^ y) == z).astype(np.int64)
    return bool(np.array_equal(lhs, expected))


def check_modular_data(c: PointedModularCategory) -> None:
    size = 1 << c.n
    S, T = c.S, c.T
    if not np.array_equal(S, S.T):
        raise VerificationError("S-matrix is not symmetric")
    if not np.array_equal(S @ S.T, size * np.eye(size, dtype=np.int64)):
        raise VerificationError("S S^T is not 2^{2m} I")
    if not np.array_equal(T * T, np.ones(size, dtype=np.int64)):
        raise VerificationError("T^2 is not the identity")
    if not (S[0] == 1).all() or T[0] != 1:
        raise VerificationError("Unit object row is not all +1")
    if c.tau_plus * c.tau_plus != global_dimension(c):
        raise VerificationError("|tau+|^2 differs from the global dimension")
    if any(fusion(x, dual(x)) for x in c.labels):
        raise VerificationError("A label is not self-inverse")


# ---------- products and classification ----------

def deligne_product(c: PointedModularCategory, d: PointedModularCategory) -> PointedModularCategory:
    """
    C boxtimes D = C(G + G', q + q'); d's coordinates sit in the high bits, so a
    label is x1 + 2^{n1} x2 and S, T are Kronecker products.
    """
    product = build_category(direct_sum(c.q, d.q))
    if not np.array_equal(product.S, np.kron(d.S, c.S)):
        raise VerificationError("Deligne product S-matrix is not the Kronecker product")
    if not np.array_equal(product.T, np.kron(d.T, c.T)):
        raise VerificationError("Deligne product T-vector is not the tensor product")
    if product.tau_plus != c.tau_plus * d.tau_plus:
        raise VerificationError("Gauss sums did not multiply")
    return product


def prime_decomposition(c: PointedModularCategory) -> PrimeDecomposition:
    if c.n == 0:
        return PrimeDecomposition(descriptor=CategoryDescriptor(m=0), basis_change=Gf2Matrix.identity(0))
    dec = canonical_decomposition(c.q)
    return PrimeDecomposition(
        descriptor=CategoryDescriptor(m=dec.form_class.m, blocks=dec.blocks),
        basis_change=dec.basis_change,
    )


def classify_from_gauss_sum(tau: int) -> CategoryDescriptor:
    """
    The unique C(Z_2^{2m}, q) with positive Gauss sum tau: q1^m when tau > 0,
    q1^(m-1) + q2 when tau < 0. tau = 1 gives Vec.
    """
    size = abs(tau)
    if size == 0 or size & (size - 1) or tau == -1:
        raise InvalidInputError(f"No pointed modular category of this kind has Gauss sum {tau}")
    m = size.bit_length() - 1
    descriptor = CategoryDescriptor(m=m, blocks=tuple(canonical_blocks(m, 0 if tau > 0 else 1)) if m else ())
    if descriptor.build().tau_plus != tau:
        raise VerificationError(f"Descriptor for tau={tau} does not reproduce it")
    return descriptor


def block_braidings() -> Tuple[Cochain2, Cochain2]:
    """
    c1((x,y),(a,b)) = (-1)^{xb} and c2((x,y),(a,b)) = (-1)^{xa+yb+ay} on Z_2^2,
    label (x, y) encoded as x + 2y.
    """
    c1 = np.zeros((4, 4), dtype=np.uint8)
    c2 = np.zeros((4, 4), dtype=np.uint8)
    for u in range(4):
        x, y = u & 1, u >> 1
        for v in range(4):
            a, b = v & 1, v >> 1
            c1[u, v] = x & b
            c2[u, v] = (x & a) ^ (y & b) ^ (a & y)
    return Cochain2(2, c1), Cochain2(2, c2)


# ---------- equivalence ----------

def check_equivalence_data(q: QuadraticForm, r: QuadraticForm, data: EquivalenceData) -> bool:
    """f*(omega_r) = omega_q delta mu and f*(c_r) = c_q mu / mu^T, plus q = f*(r)."""
    if not data.f.is_invertible():
        return False
    if not agree_everywhere(q, pullback(r, data.f)):
        return False
    source = cocycle_from_form(q)
    target = pullback_pair(cocycle_from_form(r), data.f)
    return is_witness(source, target, data.mu)


def verify_equivalence(q: QuadraticForm, r: QuadraticForm) -> Optional[EquivalenceData]:
    """
    A braided equivalence C(q) -> C(r): the group map f from the form-level
    witness and mu solving the coboundary system between the cocycle pairs.

    Returns:
        None exactly when (dim, arf) differ.
    """
    if q.n != r.n:
        return None
    f = equivalence_witness(q, r)
    if f is None:
        return None
    mu = coboundary_witness(cocycle_from_form(q), pullback_pair(cocycle_from_form(r), f))
    if mu is None:
        raise VerificationError("Equivalent forms gave non-cohomologous cocycle pairs")
    data = EquivalenceData(f=f, mu=mu)
    if not check_equivalence_data(q, r, data):
        raise VerificationError("Equivalence data failed verification")
    logger.debug("Equivalence witness on Z_2^%d (arf %d)", q.n, arf(q))
    return data
