import random
from fractions import Fraction
from math import gcd

import pytest

from flatrat.automata import Atom, star
from flatrat.commens import (
    conj_subgroup_cosets,
    conj_subgroup_test,
    conjugate_rat,
    push_right,
)
from flatrat.errors import NotInGL2ZError, SingularMatrixError
from flatrat.glz import (
    glz_enumerate,
    glz_from_expr,
    glz_member,
    glz_one,
    glz_singleton,
)
from flatrat.linear import (
    GEN_J,
    GEN_S,
    GEN_T,
    IDENTITY,
    diag,
    in_gl2z,
    mat2,
    mat_inverse,
    mat_pow,
)

S, T, J = GEN_S, GEN_T, GEN_J


def random_gl2z(rng, length=8):
    m = IDENTITY
    for _ in range(rng.randint(0, length)):
        m = m * rng.choice([S, T, J, mat_inverse(T)])
    return m


def test_conj_subgroup_test():
    g = diag(1, 2)
    assert conj_subgroup_test(IDENTITY, g)
    # conjugate of [[1,1],[0,1]] by diag(1,2) is [[1,2],[0,1]]: integral
    assert conj_subgroup_test(T, g)
    # the lower shear conjugates to a half-integer matrix
    low = mat2(1, 0, 1, 1)
    assert not conj_subgroup_test(low, g)
    assert (mat_inverse(g) * low * g) == mat2(1, 0, Fraction(1, 2), 1)

    with pytest.raises(NotInGL2ZError):
        conj_subgroup_test(diag(1, 2), g)
    with pytest.raises(SingularMatrixError):
        conj_subgroup_test(T, diag(1, 0))


def test_cosets_in_gl2z_is_trivial():
    rng = random.Random(41)
    for _ in range(5):
        g = random_gl2z(rng)
        table = conj_subgroup_cosets(g)
        assert table.index() == 1


def projective_line_size(q: int) -> int:
    """|P^1(Z/q)| by direct orbit counting: pairs (c,d) with gcd(c,d,q)=1
    modulo multiplication by units of Z/q."""
    units = [u for u in range(q) if gcd(u, q) == 1]
    pts = {
        (c, d)
        for c in range(q)
        for d in range(q)
        if gcd(gcd(c, d), q) == 1
    }
    classes = set()
    for (c, d) in pts:
        orbit = frozenset(((u * c) % q, (u * d) % q) for u in units)
        classes.add(orbit)
    return len(classes)


def test_coset_index_formula():
    # index of the stable subgroup for diag(1,q): q * prod(1 + 1/p)
    expected = {2: 3, 3: 4, 4: 6, 5: 6, 6: 12}
    for q, idx in expected.items():
        table = conj_subgroup_cosets(diag(1, q))
        assert table.index() == idx, q
        assert projective_line_size(q) == idx


def test_cosets_partition_samples():
    rng = random.Random(42)
    g = diag(1, 2)
    table = conj_subgroup_cosets(g)
    samples = [random_gl2z(rng) for _ in range(200)]
    for h in samples:
        hits = [
            i
            for i, u in enumerate(table.reps)
            if conj_subgroup_test(mat_inverse(u) * h, g)
        ]
        assert len(hits) == 1, h


def test_conjugate_rat_basic():
    g = diag(1, 2)
    assert glz_enumerate(conjugate_rat(glz_one(), g), 2) == {IDENTITY}

    # T^2 conjugates to T^4 under diag(1,2)
    L = glz_from_expr(star(Atom(mat_pow(T, 2))))
    out = conjugate_rat(L, g)
    for k in range(-2, 9):
        assert glz_member(mat_pow(T, k), out) == (k % 4 == 0), k


def test_conjugate_rat_membership_invariant():
    rng = random.Random(43)
    g = diag(1, 2)
    L = glz_from_expr(star(Atom(mat_pow(T, 2)) | Atom(S * S)))
    out = conjugate_rat(L, g)
    ginv = mat_inverse(g)
    for _ in range(60):
        m = random_gl2z(rng, 5)
        conj = g * m * ginv
        expected = (
            in_gl2z(conj)
            and (ginv * conj * g).is_integral()
            and glz_member(conj, L)
        )
        assert glz_member(m, out) == expected, m


def test_push_right_identity_set():
    g = diag(2, 3)
    branches = push_right(glz_one(), g)
    assert len(branches) == 1
    gp, K = branches[0]
    assert gp == g
    assert glz_enumerate(K, 2) == {IDENTITY}


def test_push_right_set_equality_sampled():
    rng = random.Random(44)
    g = diag(1, 2)
    K = glz_from_expr(star(Atom(mat_pow(T, 2))))
    branches = push_right(K, g)
    assert branches
    # sampled elements of K*g lie in exactly the union of the branches
    for k in range(0, 7):
        target = mat_pow(T, 2 * k) * g
        hit = False
        for gp, Kp in branches:
            w = mat_inverse(gp) * target
            if in_gl2z(w) and glz_member(w, Kp):
                hit = True
        assert hit, k
    # and branch members map back into K*g
    for gp, Kp in branches:
        for m in glz_enumerate(Kp, 3):
            prod = gp * m
            w = prod * mat_inverse(g)
            assert in_gl2z(w) and glz_member(w, K), (gp, m)


def test_push_right_empty():
    assert push_right(glz_from_expr(Atom(T) * Atom(T)), diag(1, 2)) != []
    from flatrat.glz import glz_empty

    assert push_right(glz_empty(), diag(1, 2)) == []
