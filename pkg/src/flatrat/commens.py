"""Commensurator computations in GL(2,Q) over GL(2,Z).

For nonsingular rational g, the subgroup of integer unimodular h whose
conjugate g^-1 h g is again integer unimodular has finite index in GL(2,Z);
its left-coset representatives let a rational subset K be pushed across g:
K g is rewritten as a finite union of translates g' K' with K' again a
rational subset of GL(2,Z).
"""

from __future__ import annotations

from functools import lru_cache

from .cosets import CosetTable, build_coset_table
from .errors import NotInGL2ZError, SingularMatrixError
from .glz import (
    GlzRat,
    glz_boolean,
    glz_empty,
    glz_from_nfa,
    glz_left_mul,
    glz_to_nfa,
    subgroup_intersect,
)
from .automata import relabel
from .linear import Mat2, in_gl2z, mat_inverse, smith_normal_form


def conj_subgroup_test(h: Mat2, g: Mat2) -> bool:
    """Membership of h in GL(2,Z) intersected with g GL(2,Z) g^-1: the
    conjugate g^-1 h g must be integral (its determinant is already +-1)."""
    if not in_gl2z(h):
        raise NotInGL2ZError(f"{h} is not in GL(2,Z)")
    if g.det() == 0:
        raise SingularMatrixError("conjugating matrix must be nonsingular")
    return (mat_inverse(g) * h * g).is_integral()


def _sl2_mod_size(q: int) -> int:
    """Order of SL(2, Z/qZ)."""
    q = abs(q)
    if q <= 1:
        return 1
    size = q ** 3
    n = q
    p = 2
    while p * p <= n:
        if n % p == 0:
            size = size // (p * p) * (p * p - 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        size = size // (n * n) * (n * n - 1)
    return size


def conj_subgroup_cosets(g: Mat2, budget: int | None = None) -> CosetTable:
    """Left-coset representatives of the conjugation-stable subgroup in
    GL(2,Z), by BFS over the standard generators.

    The default budget is four times the order of SL(2, Z/qZ) for the Smith
    q of g, which bounds the index.
    """
    if g.det() == 0:
        raise SingularMatrixError("conjugating matrix must be nonsingular")
    if budget is None:
        q = smith_normal_form(g).q
        budget = 4 * _sl2_mod_size(q)
    ginv = mat_inverse(g)

    def test(h: Mat2) -> bool:
        return (ginv * h * g).is_integral()

    return build_coset_table(test, budget)


@lru_cache(maxsize=256)
def _cached_cosets(g: Mat2) -> CosetTable:
    return conj_subgroup_cosets(g)


def conjugate_rat(L: GlzRat, g: Mat2) -> GlzRat:
    """The set g^-1 (L restricted to the conjugation-stable subgroup) g.

    The restriction is computed by the coset-annotation product against the
    subgroup table; every label of the result lies in the subgroup, so its
    conjugate by g stays in GL(2,Z) and relabeling gives the answer.
    """
    if g.det() == 0:
        raise SingularMatrixError("conjugating matrix must be nonsingular")
    if L.is_empty():
        return glz_empty()
    table = _cached_cosets(g)
    restricted = subgroup_intersect(glz_to_nfa(L), table)
    ginv = mat_inverse(g)
    conjugated = relabel(restricted, lambda m: ginv * m * g)
    return glz_from_nfa(conjugated)


def push_right(K: GlzRat, g: Mat2) -> list:
    """Rewrite K g as a finite union of left translates: returns pairs
    (g', K') with union of g' K' equal to K g, empty branches pruned."""
    if g.det() == 0:
        raise SingularMatrixError("translating matrix must be nonsingular")
    if K.is_empty():
        return []
    table = _cached_cosets(g)
    out = []
    for u in table.reps:
        shifted = glz_left_mul(mat_inverse(u), K)
        piece = conjugate_rat(shifted, g)
        if not piece.is_empty():
            out.append((u * g, piece))
    return out
