#!/usr/bin/env python3
"""
Tests for pointed modular categories C(Z_2^{2m}, q): modular data, Gauss sums,
Deligne products, prime decompositions and braided equivalences.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import random

import numpy as np
import pytest
from app.errors import InvalidInputError, NotModularError
from app.services.em_cocycles import Cochain2, Cochain3, EmPair, check_hexagons, trace
from app.services.gf2_core import Gf2Matrix, random_invertible
from app.services.modular_data import (
    CategoryDescriptor,
    EquivalenceData,
    build_category,
    central_charge,
    check_equivalence_data,
    check_modular_data,
    classify_from_gauss_sum,
    deligne_product,
    dual,
    fsexp_check,
    fusion,
    gauss_sum_tau,
    global_dimension,
    normalized_s_matrix,
    prime_decomposition,
    block_braidings,
    trivial_category,
    verify_equivalence,
    verify_verlinde,
)
from app.services.quadratic_forms import (
    QuadraticForm,
    agree_everywhere,
    all_forms,
    arf,
    canonical_form,
    canonical_q1,
    canonical_q2,
    direct_sum,
    direct_sum_all,
    is_nondegenerate,
    pullback,
    standard_polar_forms,
)


def _form_library(rng, per_class=5):
    """Non-degenerate forms for 2m <= 6: every form at 2m <= 4, random pullbacks at 2m = 6."""
    forms = [q for n in (2, 4) for q in all_forms(n) if is_nondegenerate(q)]
    for a in (0, 1):
        base = canonical_form(3, a)
        forms += [pullback(base, random_invertible(6, rng)) for _ in range(per_class)]
    return forms


def _deligne_fold(descriptor):
    """Rebuild a category as the Deligne product of its rank-4 prime factors."""
    factors = {"q1": build_category(canonical_q1()), "q2": build_category(canonical_q2())}
    product = trivial_category()
    for block in descriptor.blocks:
        product = deligne_product(product, factors[block])
    return product


class TestBuild:
    """S and T for the rank-4 building blocks."""

    def setup_method(self):
        self.c1 = build_category(canonical_q1())
        self.c2 = build_category(canonical_q2())

    def test_q1_s_matrix(self):
        expected = [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]
        assert self.c1.S.tolist() == expected

    def test_q2_t_vector(self):
        assert self.c2.T.tolist() == [1, -1, -1, -1]

    def test_gauss_sums(self):
        assert (gauss_sum_tau(self.c1), central_charge(self.c1)) == (2, 1)
        assert (gauss_sum_tau(self.c2), central_charge(self.c2)) == (-2, -1)
        mixed = build_category(direct_sum(canonical_q1(), canonical_q2()))
        assert gauss_sum_tau(mixed) == -4

    def test_degenerate_is_not_modular(self):
        with pytest.raises(NotModularError):
            build_category(QuadraticForm.from_coefficients(2, 0b01))

    def test_odd_dimension(self):
        with pytest.raises(InvalidInputError):
            build_category(QuadraticForm.from_coefficients(3, 0, [(0, 1)]))

    def test_group_structure(self):
        assert fusion(1, 3) == 2
        assert dual(3) == 3
        assert global_dimension(self.c1) == 4
        assert np.allclose(normalized_s_matrix(self.c1) @ normalized_s_matrix(self.c1).T, np.eye(4))

    def test_fsexp(self):
        assert fsexp_check(self.c1) == 2
        assert fsexp_check(build_category(direct_sum(canonical_q1(), canonical_q2()))) == 2
        assert fsexp_check(trivial_category()) == 1


class TestModularData:
    """Sanity of S, T and Gauss sums across a form library."""

    def setup_method(self):
        self.rng = random.Random(31)
        self.forms = _form_library(self.rng)

    def test_modular_data(self):
        for q in self.forms:
            check_modular_data(build_category(q))

    def test_gauss_sum_identity(self):
        for q in self.forms:
            c = build_category(q)
            assert c.tau_plus == (-1) ** arf(q) * 2 ** c.m
            assert c.xi == (-1) ** arf(q)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_standard_polar_forms(self, m):
        for q in standard_polar_forms(m):
            c = build_category(q)
            assert c.xi == (-1) ** arf(q)

    def test_verlinde(self):
        for q in (canonical_q1(), canonical_q2(), canonical_form(2, 1), canonical_form(3, 0)):
            assert verify_verlinde(build_category(q))


class TestProducts:
    """Deligne products and the prime decomposition."""

    def setup_method(self):
        self.c1 = build_category(canonical_q1())
        self.c2 = build_category(canonical_q2())
        self.rng = random.Random(13)

    def test_unit(self):
        product = deligne_product(self.c1, trivial_category())
        assert np.array_equal(product.S, self.c1.S)
        assert np.array_equal(product.T, self.c1.T)

    def test_kronecker(self):
        product = deligne_product(self.c1, self.c1)
        assert np.array_equal(product.S, np.kron(self.c1.S, self.c1.S))

    def test_q2_squared(self):
        assert deligne_product(self.c2, self.c2).tau_plus == 4

    def test_prime_decompositions(self):
        assert prime_decomposition(build_category(direct_sum(canonical_q2(), canonical_q2()))).descriptor.blocks == ("q1", "q1")
        assert prime_decomposition(self.c2).descriptor.blocks == ("q2",)
        q = direct_sum_all([canonical_q1(), canonical_q1(), canonical_q2()])
        pulled = pullback(q, random_invertible(6, self.rng))
        decomposition = prime_decomposition(build_category(pulled))
        assert decomposition.descriptor.blocks == ("q1", "q1", "q2")
        assert decomposition.descriptor.factors() == ["C(Z_2^2, q1)", "C(Z_2^2, q1)", "C(Z_2^2, q2)"]
        assert agree_everywhere(pullback(pulled, decomposition.basis_change), q)


class TestGaussSumClassification:
    """The Gauss sum determines the category."""

    def test_examples(self):
        assert classify_from_gauss_sum(2).blocks == ("q1",)
        assert classify_from_gauss_sum(-2).blocks == ("q2",)
        assert classify_from_gauss_sum(-8).blocks == ("q1", "q1", "q2")
        assert classify_from_gauss_sum(1) == CategoryDescriptor(m=0)

    @pytest.mark.parametrize("tau", [0, 3, -1, 6, -12])
    def test_no_such_category(self, tau):
        with pytest.raises(InvalidInputError):
            classify_from_gauss_sum(tau)

    def test_round_trip(self):
        # every form at 2m <= 4; at 2m = 6 every standard-polar form, moved by a random basis change
        rng = random.Random(3)
        forms = [q for n in (2, 4) for q in all_forms(n) if is_nondegenerate(q)]
        forms += [pullback(q, random_invertible(6, rng)) for q in standard_polar_forms(3)]
        for q in forms:
            c = build_category(q)
            descriptor = classify_from_gauss_sum(gauss_sum_tau(c))
            assert descriptor == prime_decomposition(c).descriptor
            rebuilt = _deligne_fold(descriptor)
            assert agree_everywhere(rebuilt.q, canonical_form(c.m, arf(q)))
            if q.n <= 4:
                data = verify_equivalence(rebuilt.q, q)
                assert data is not None
                assert check_equivalence_data(rebuilt.q, q, data)

    @pytest.mark.parametrize("a", [0, 1])
    def test_round_trip_equivalence_at_six(self, a):
        rng = random.Random(40 + a)
        q = pullback(canonical_form(3, a), random_invertible(6, rng))
        rebuilt = _deligne_fold(classify_from_gauss_sum(gauss_sum_tau(build_category(q))))
        data = verify_equivalence(rebuilt.q, q)
        assert data is not None
        assert check_equivalence_data(rebuilt.q, q, data)


class TestEquivalence:
    """Braided equivalences from form witnesses and coboundary solves."""

    def setup_method(self):
        self.rng = random.Random(101)

    def test_block_braidings(self):
        c1, c2 = block_braidings()
        one = Cochain3.trivial(2)
        assert check_hexagons(one, c1) and check_hexagons(one, c2)
        assert trace(EmPair(one, c1)) == canonical_q1()
        assert trace(EmPair(one, c2)) == canonical_q2()

    def test_q1q1_and_q2q2(self):
        q = direct_sum(canonical_q1(), canonical_q1())
        r = direct_sum(canonical_q2(), canonical_q2())
        data = verify_equivalence(q, r)
        assert data is not None
        assert check_equivalence_data(q, r, data)

    def test_inequivalent(self):
        assert verify_equivalence(canonical_q1(), canonical_q2()) is None

    def test_reflexive(self):
        q = pullback(direct_sum(canonical_q1(), canonical_q2()), random_invertible(4, self.rng))
        data = verify_equivalence(q, q)
        assert data is not None
        assert check_equivalence_data(q, q, data)

    def test_tampered_data_rejected(self):
        q = direct_sum(canonical_q1(), canonical_q1())
        r = direct_sum(canonical_q2(), canonical_q2())
        data = verify_equivalence(q, r)
        table = data.mu.values.copy()
        table[1, 1] ^= 1
        assert not check_equivalence_data(q, r, EquivalenceData(f=data.f, mu=Cochain2(4, table)))
        assert not check_equivalence_data(q, r, EquivalenceData(f=Gf2Matrix.identity(4), mu=data.mu))

    def test_random_pairs(self):
        for _ in range(10):
            a = self.rng.getrandbits(1)
            q = pullback(canonical_form(2, a), random_invertible(4, self.rng))
            r = pullback(canonical_form(2, a), random_invertible(4, self.rng))
            data = verify_equivalence(q, r)
            assert data is not None
