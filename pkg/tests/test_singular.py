import random
from fractions import Fraction

import pytest

from flatrat.automata import Atom, concat, make_nfa, star, union
from flatrat.errors import SingularMatrixError, UnsupportedInputError
from flatrat.flat import FlatExpr, flat_branch
from flatrat.glz import glz_from_expr, glz_one, glz_singleton
from flatrat.linear import (
    GEN_J,
    GEN_S,
    GEN_T,
    IDENTITY,
    MONOID_P,
    MONOID_PPRIME,
    S0,
    ZERO,
    Mat2,
    central,
    diag,
    mat2,
    mat_pow,
)
from flatrat.oracle import enumerate_products
from flatrat.singular import (
    ScaledS0,
    SingularInstance,
    build_singular_instance,
    final_test,
    flood_h_transitions,
    flood_shortcuts,
    singular_member,
    zero_member,
)

S, T, J = GEN_S, GEN_T, GEN_J
SWAP = mat2(0, 1, 1, 0)


def pprime_flat(*items) -> FlatExpr:
    return FlatExpr((flat_branch(*items),), MONOID_PPRIME)


def p_flat(*items) -> FlatExpr:
    return FlatExpr((flat_branch(*items),), MONOID_P)


def test_rank_one_collapse_identity():
    rng = random.Random(61)
    for _ in range(200):
        r = Fraction(rng.randint(-20, 20), rng.randint(1, 8))
        m = Mat2(*(Fraction(rng.randint(-9, 9)) for _ in range(4)))
        lhs = S0 * (r * m) * S0
        rhs = (r * m.a11) * S0
        assert lhs == rhs


def test_zero_member_examples():
    assert not zero_member(p_flat(star(Atom(T))))
    assert zero_member(p_flat(Atom(ZERO)))
    assert zero_member(p_flat(union(Atom(T), Atom(ZERO))))
    # s0 * diag(0,1) = 0
    assert zero_member(p_flat(concat(Atom(S0), Atom(diag(0, 1)))))
    # invertible central labels have no effect
    assert not zero_member(p_flat(star(Atom(central(Fraction(1, 2))))))
    assert zero_member(
        p_flat(concat(Atom(central(Fraction(-3, 2))), Atom(S0), Atom(diag(0, 1))))
    )


def test_zero_member_star_product():
    # s0 * S * s0 has top-left entry 0, so 0 is reachable inside the star
    e = p_flat(star(union(Atom(S0), Atom(S))))
    assert zero_member(e)
    # but products of s0 alone never vanish
    assert not zero_member(p_flat(star(Atom(S0))))


def test_singular_member_examples():
    assert singular_member(diag(2, 0), pprime_flat(concat(Atom(central(2)), Atom(S0))))
    assert singular_member(
        mat2(0, 1, 0, 0), pprime_flat(concat(Atom(S0), Atom(SWAP)))
    )
    assert S0 * SWAP == mat2(0, 1, 0, 0)
    assert not singular_member(diag(1, 0), pprime_flat(star(Atom(T))))


def test_singular_member_requires_singular_target():
    with pytest.raises(SingularMatrixError):
        singular_member(T, pprime_flat(Atom(S0)))


def test_singular_member_gcd_obstruction():
    # members of {c_3 s0} are 3*s0-multiples; target gcd 1 fails
    e = pprime_flat(concat(Atom(central(3)), Atom(S0)))
    assert not singular_member(S0, e)
    assert singular_member(3 * S0, e)
    assert not singular_member(2 * S0, e)


def test_singular_member_rational_target_scaling():
    # connector carries scalar 1/2: branch denotes (1/2) * s0-products
    e = pprime_flat(central(Fraction(1, 2)), Atom(S0))
    assert singular_member(Fraction(1, 2) * S0, e)
    assert not singular_member(S0, e)


def test_singular_member_two_projectors():
    # s0 * h * s0 = h11 * s0: with h = T (h11 = 1) the double product stays s0
    e = pprime_flat(concat(Atom(S0), Atom(T), Atom(S0)))
    assert singular_member(S0, e)
    # with h = S (h11 = 0) the product is zero
    e2 = pprime_flat(concat(Atom(S0), Atom(S), Atom(S0)))
    assert not singular_member(S0, e2)
    assert singular_member(ZERO, e2)


def test_singular_member_entry_growth():
    # s0 * T^k * s0 = s0 for any k: star of {s0, T} reaches every r*s0 with
    # r an attainable top-left entry; e.g. phi(y)=[[1,0],[2,1]] has entry 1
    e = pprime_flat(star(union(Atom(S0), Atom(mat2(2, 1, 1, 1)))))
    # [[2,1],[1,1]] has top-left 2: s0 [[2,1],[1,1]] s0 = 2 s0
    assert singular_member(2 * S0, e)
    assert singular_member(S0, e)
    assert not singular_member(3 * S0, e)  # gcd(2*s0 entries)... 3 unreachable


def test_singular_witness_oracle_random():
    rng = random.Random(62)
    pool = [T, S, J, S0, central(2), diag(0, 1), mat2(0, 1, 0, 0)]
    for _ in range(25):
        labels = [rng.choice(pool) for _ in range(rng.randint(1, 3))]
        e = pprime_flat(star(union(*(Atom(l) for l in labels))))
        nfa = make_nfa({0}, {0}, {0}, {(0, l, 0) for l in labels})
        prods = enumerate_products(nfa, 4)
        for m in prods:
            if m.det() != 0:
                continue
            got = singular_member(m, e) if not m.is_zero() else zero_member(
                FlatExpr(e.branches, MONOID_P)
            )
            assert got, (labels, m)


def test_singular_negative_entries():
    e = pprime_flat(concat(Atom(-IDENTITY), Atom(S0)))
    assert singular_member(-S0, e)
    assert not singular_member(S0, e)


def test_all_invertible_rejection():
    e = pprime_flat(star(union(Atom(T), Atom(S), Atom(central(2)))))
    assert not singular_member(S0, e)
    assert not singular_member(ZERO, e)


def test_unsupported_connector():
    # diag(1,3) connector has Smith q = 3; mixing it with s0 labels is out of
    # the implemented fragment
    e = pprime_flat(Atom(S0), diag(1, 3), Atom(S0))
    with pytest.raises(UnsupportedInputError):
        singular_member(S0, e)
    # but the same connector with no singular label present answers False
    e2 = pprime_flat(star(Atom(T)), diag(1, 3), star(Atom(T)))
    assert not singular_member(S0, e2)


def test_flood_h_transitions_single():
    nfa = make_nfa({0, 1}, {0}, {1}, {(0, T, 1)})
    out = flood_h_transitions(nfa)
    added = out.transitions - nfa.transitions
    by_pair = {}
    for (p, lbl, q) in added:
        by_pair.setdefault((p, q), []).append(lbl)
    sets01 = [l for l in by_pair.get((0, 1), []) if not isinstance(l, Mat2)]
    assert len(sets01) == 1
    from flatrat.glz import glz_member

    assert glz_member(T, sets01[0])
    assert not glz_member(IDENTITY, sets01[0])
    # identity factored out on the diagonal
    assert any(isinstance(l, Mat2) and l == IDENTITY for l in by_pair.get((0, 0), []))


def test_flood_h_transitions_loop():
    nfa = make_nfa({0, 1}, {0}, {1}, {(0, T, 0), (0, S, 1)})
    out = flood_h_transitions(nfa)
    from flatrat.glz import glz_member

    sets = [
        lbl
        for (p, lbl, q) in out.transitions - nfa.transitions
        if (p, q) == (0, 1) and not isinstance(lbl, Mat2)
    ]
    assert len(sets) == 1
    L = sets[0]
    for k in range(4):
        assert glz_member(mat_pow(T, k) * S, L)
    assert not glz_member(T, L)


def test_flood_shortcuts_adds_divisor_edge():
    # pattern q' -(1 s0)-> p -(L)-> q -(1 s0)-> p' with L containing a matrix
    # of top-left entry 2 and target gcd 2
    L = glz_from_expr(Atom(mat2(2, 1, 1, 1)))
    nfa = make_nfa(
        {"q0", "p1", "q1", "p2"},
        {"q0"},
        {"p2"},
        {
            ("q0", ScaledS0(1), "p1"),
            ("p1", L, "q1"),
            ("q1", ScaledS0(1), "p2"),
        },
    )
    out = flood_shortcuts(nfa, 2)
    labels = {lbl for (p, lbl, q) in out.transitions if (p, q) == ("q0", "p2")}
    assert ScaledS0(2) in labels
    assert ScaledS0(1) in labels  # entry 1 also attainable? no: only via z=1
    # t = 1 allows only unit shortcuts
    out1 = flood_shortcuts(nfa, 1)
    labels1 = {lbl for (p, lbl, q) in out1.transitions if (p, q) == ("q0", "p2")}
    assert ScaledS0(2) not in labels1


def test_flood_shortcuts_zero_target():
    L = glz_from_expr(Atom(S))  # top-left entry 0
    nfa = make_nfa(
        {"q0", "p1", "q1", "p2"},
        {"q0"},
        {"p2"},
        {
            ("q0", ScaledS0(1), "p1"),
            ("p1", L, "q1"),
            ("q1", ScaledS0(1), "p2"),
        },
    )
    out = flood_shortcuts(nfa, 0)
    labels = {lbl for (p, lbl, q) in out.transitions if (p, q) == ("q0", "p2")}
    assert ScaledS0(0) in labels


def test_final_test_examples():
    one = glz_one()
    assert final_test(2, one, one, 2 * S0)
    assert not final_test(2, one, one, S0)

    swap_set = glz_singleton(SWAP)
    assert final_test(1, one, swap_set, mat2(0, 1, 0, 0))
    assert not final_test(1, one, swap_set, mat2(1, 0, 0, 0))

    assert not final_test(2, one, one, mat2(1, 0, 0, 0))  # 2 does not divide 1
    assert final_test(0, one, one, ZERO)
    assert not final_test(1, one, one, ZERO)


def test_final_test_pairs_not_single_entries():
    # L1 holds matrices with (column) (1,0) and (3,2) but never (1,2):
    # single-entry reasoning would wrongly accept column (1,2)
    L1 = glz_from_expr(union(Atom(IDENTITY), Atom(mat2(3, 1, 2, 1))))
    one = glz_one()
    target = mat2(1, 0, 2, 0)  # needs column (1,2) and row (1,0)
    assert not final_test(1, L1, one, target)
    ok = glz_from_expr(Atom(mat2(1, 0, 2, 1)))
    assert final_test(1, ok, one, target)


def test_instance_metadata():
    branch = flat_branch(Atom(S0), central(Fraction(1, 2)), Atom(S0))
    inst = build_singular_instance(S0, branch, target_zero=False)
    assert isinstance(inst, SingularInstance)
    assert inst.rho == 1
    assert inst.target == 2 * S0  # scaled by the connector denominator
    assert inst.target_gcd == 2
