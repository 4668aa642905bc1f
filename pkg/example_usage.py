#!/usr/bin/env python3
"""
Example usage of the fsexp2 library: classify a form, build its category,
and certify the FS exponent of a few cocycles.

For the command-line equivalent see `python -m app --help`.
"""

from app.services.em_cocycles import (
    Cochain3,
    HwyParams,
    certify_fsexp2,
    fs_exponent,
    hwy_cocycle,
    restriction_vector,
)
from app.services.modular_data import (
    build_category,
    classify_from_gauss_sum,
    prime_decomposition,
    verify_equivalence,
)
from app.services.quadratic_forms import arf, canonical_q1, canonical_q2, direct_sum


def main():
    print("fsexp2 example")
    print("=" * 60)

    q = direct_sum(canonical_q2(), canonical_q2())
    category = build_category(q)
    decomposition = prime_decomposition(category)
    print("\nForm q2 + q2 on Z_2^4")
    print(f"   Arf invariant: {arf(q)}")
    print(f"   Gauss sum tau+: {category.tau_plus}, central charge: {category.xi}")
    print(f"   Prime factors: {' x '.join(decomposition.descriptor.factors())}")
    print(f"   Basis change rows: {list(decomposition.basis_change.rows)}")

    other = direct_sum(canonical_q1(), canonical_q1())
    data = verify_equivalence(other, q)
    print("\nq1 + q1 vs q2 + q2")
    print(f"   braided equivalence found: {data is not None}")
    if data is not None:
        print(f"   group map rows: {list(data.f.rows)}")

    for tau in (2, -2, -8):
        print(f"\nGauss sum {tau} -> {classify_from_gauss_sum(tau).factors()}")

    print("\nFS exponents")
    for label, omega in (
        ("trivial on Z_2^3", Cochain3.trivial(3)),
        ("hwy n=1, a_1=1", hwy_cocycle(HwyParams(n=1, a_r=(1,)))),
        ("hwy n=2, a_12=1", hwy_cocycle(HwyParams(n=2, a_r=(0, 0), a_rs=(1,)))),
    ):
        cert = certify_fsexp2(omega)
        print(
            f"   {label}: restrictions {list(restriction_vector(omega).entries)}, "
            f"FSexp {fs_exponent(omega)}, certificate {'yes' if cert else 'no'}"
        )


if __name__ == "__main__":
    main()
