"""Rational subsets of GL(2,Z) as an effective Boolean algebra.

The group is virtually free: the subgroup generated by [[1,2],[0,1]] and
[[1,0],[2,1]] is free of rank 2 and has index 24.  A rational subset is
stored per left coset of that subgroup, as a word automaton over {x,X,y,Y}
accepting the reduced words w with rep * phi(w) in the set.  Boolean
operations act componentwise through the free-group algebra; automata with
matrix labels are converted by annotating states with the coset of the
remaining suffix, which keeps every new label inside the subgroup.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from . import automata as au
from .automata import Atom, LabeledNfa, RatExpr, concat, expr_to_nfa, star, union
from .cosets import CosetTable, build_coset_table
from .errors import NotInGL2ZError, NotInSubgroupError
from .freegroup import (
    INVERSE,
    WordNfa,
    canonical_form,
    enumerate_reduced,
    fg_boolean,
    invert_word,
    reduce_word,
    universe_nfa,
    wnfa_accepts,
    wnfa_is_empty,
    wnfa_remove_epsilon,
    wnfa_trim,
    word_nfa,
)
from .linear import (
    GEN_J,
    GEN_S,
    GEN_T,
    IDENTITY,
    Mat2,
    in_gl2z,
    mat2,
    mat_inverse,
    mat_pow,
)

# Images of the free generators.
PHI = {
    "x": mat2(1, 2, 0, 1),
    "X": mat2(1, -2, 0, 1),
    "y": mat2(1, 0, 2, 1),
    "Y": mat2(1, 0, -2, 1),
}


def phi_word(w: str) -> Mat2:
    m = IDENTITY
    for c in w:
        m = m * PHI[c]
    return m


def free_reduce(m: Mat2) -> Optional[str]:
    """The reduced word representing m in the free subgroup, or None.

    Greedy ping-pong reduction: left powers of the generators shrink the
    first column until the matrix is a power of [[1,2],[0,1]]; a leftover
    sign means the matrix lies in the congruence part but not the subgroup.
    """
    if not m.is_integral():
        return None
    a, b, c, d = m.int_entries()
    if a * d - b * c != 1:
        return None
    if a % 2 == 0 or d % 2 == 0 or b % 2 or c % 2:
        return None
    def nearest(p, q):
        # nearest integer to p/q, exact; never a tie here by parity
        k0 = p // q
        return min((k0, k0 + 1), key=lambda k: abs(p - k * q))

    runs = []
    while c != 0:
        if abs(a) > abs(c):
            k = nearest(a, 2 * c)
            a, b = a - 2 * k * c, b - 2 * k * d
            runs.append(("x", k))
        else:
            k = nearest(c, 2 * a)
            c, d = c - 2 * k * a, d - 2 * k * b
            runs.append(("y", k))
    if a == -1:
        return None
    if b:
        runs.append(("x", b // 2))
    out = []
    for letter, k in runs:
        if k > 0:
            out.append(letter * k)
        elif k < 0:
            out.append(INVERSE[letter] * (-k))
    return "".join(out)


def in_free_subgroup(m: Mat2) -> bool:
    return free_reduce(m) is not None


FREE_INDEX = 24


@lru_cache(maxsize=1)
def free_coset_table() -> CosetTable:
    table = build_coset_table(in_free_subgroup, budget=2 * FREE_INDEX)
    assert table.index() == FREE_INDEX
    return table


@dataclass(frozen=True)
class GlzElement:
    """Unique decomposition g = rep[coset_index] * phi(word)."""

    coset_index: int
    word: str


def sanov_decompose(g: Mat2) -> GlzElement:
    if not in_gl2z(g):
        raise NotInGL2ZError(f"{g} is not an integer matrix of determinant +-1")
    table = free_coset_table()
    for i, u in enumerate(table.reps):
        w = free_reduce(u.inverse() * g)
        if w is not None:
            return GlzElement(i, w)
    raise AssertionError("coset table does not cover GL(2,Z)")


def reconstruct(el: GlzElement) -> Mat2:
    return free_coset_table().reps[el.coset_index] * phi_word(el.word)


class GlzRat:
    """A rational subset of GL(2,Z): one reduced-language word automaton per
    inhabited left coset of the free subgroup."""

    __slots__ = ("components",)

    def __init__(self, components: dict):
        self.components = {
            c: w for c, w in components.items() if not wnfa_is_empty(w)
        }

    def is_empty(self) -> bool:
        return not self.components

    def __repr__(self):
        return f"GlzRat(cosets={sorted(self.components)})"


def glz_empty() -> GlzRat:
    return GlzRat({})


def glz_singleton(g: Mat2) -> GlzRat:
    el = sanov_decompose(g)
    nfa = word_nfa(
        set(range(len(el.word) + 1)),
        {0},
        {len(el.word)},
        {(i, c, i + 1) for i, c in enumerate(el.word)},
        reduced_language=True,
    )
    return GlzRat({el.coset_index: nfa})


def glz_one() -> GlzRat:
    return glz_singleton(IDENTITY)


def glz_universe() -> GlzRat:
    return GlzRat({c: universe_nfa() for c in range(FREE_INDEX)})


def _letters_nfa(edges, initials, finals) -> WordNfa:
    """Word NFA from edges carrying whole words; expands them into letters."""
    states = set(initials) | set(finals)
    trans = set()
    fresh = itertools.count()
    for (src, word, dst) in edges:
        states.add(src)
        states.add(dst)
        if not word:
            trans.add((src, None, dst))
            continue
        prev = src
        for c in word[:-1]:
            mid = ("w", next(fresh))
            states.add(mid)
            trans.add((prev, c, mid))
            prev = mid
        trans.add((prev, word[-1], dst))
    return word_nfa(states, initials, finals, trans)


def _suffix_coset_product(nfa: LabeledNfa, table: CosetTable):
    """Annotate states with the left coset of the suffix still to be read.

    Seeds final states at the identity coset and walks transitions backward;
    a transition p -g-> q at suffix coset j contributes an edge labeled
    b = reps[i]^-1 * g * reps[j], which lies in the subgroup, where i is the
    coset of g * reps[j].  Accepted products from an initial state annotated
    c equal reps[c] * (product of edge labels).
    """
    for lbl in nfa.labels():
        if not (isinstance(lbl, Mat2) and in_gl2z(lbl)):
            raise NotInGL2ZError(f"label {lbl!r} is not in GL(2,Z)")
    by_target = {}
    for (p, g, q) in nfa.transitions:
        by_target.setdefault(q, []).append((p, g))
    alive = {(f, 0) for f in nfa.final}
    queue = deque(alive)
    edges = []
    memo = {}
    while queue:
        (q, j) = queue.popleft()
        for (p, g) in by_target.get(q, ()):
            key = (g, j)
            if key not in memo:
                w = g * table.reps[j]
                i = table.coset_of(w)
                memo[key] = (i, table.reps[i].inverse() * w)
            i, b = memo[key]
            edges.append(((p, i), b, (q, j)))
            if (p, i) not in alive:
                alive.add((p, i))
                queue.append((p, i))
    finals = {(f, 0) for f in nfa.final}
    initials_by_coset = {}
    for (p, i) in alive:
        if p in nfa.initial:
            initials_by_coset.setdefault(i, set()).add((p, i))
    return alive, edges, initials_by_coset, finals


def glz_from_nfa(nfa: LabeledNfa) -> GlzRat:
    """Split a GL(2,Z)-labeled automaton by coset of the free subgroup."""
    nfa = au.nfa_trim(nfa)
    if not nfa.states:
        return glz_empty()
    alive, edges, initials_by_coset, finals = _suffix_coset_product(
        nfa, free_coset_table()
    )
    word_edges = [(src, free_reduce(b), dst) for (src, b, dst) in edges]
    components = {}
    for c, inits in initials_by_coset.items():
        raw = wnfa_trim(_letters_nfa(word_edges, inits, finals))
        if not wnfa_is_empty(raw):
            components[c] = canonical_form(raw)
    return GlzRat(components)


def glz_from_expr(e: RatExpr) -> GlzRat:
    return glz_from_nfa(_expr_to_matrix_nfa(e))


def _expr_to_matrix_nfa(e: RatExpr) -> LabeledNfa:
    """NFA for an expression whose atoms are matrices or GlzRat handles;
    handle-labeled transitions are inlined as matrix sub-automata."""
    nfa = expr_to_nfa(e)
    if not any(isinstance(lbl, GlzRat) for lbl in nfa.labels()):
        return nfa
    states = set(nfa.states)
    trans = set()
    fresh = itertools.count()
    for (p, lbl, q) in nfa.transitions:
        if not isinstance(lbl, GlzRat):
            trans.add((p, lbl, q))
            continue
        sub = glz_to_nfa(lbl)
        rename = {s: ("inl", next(fresh)) for s in sub.states}
        states.update(rename.values())
        for (a, l2, b) in sub.transitions:
            trans.add((rename[a], l2, rename[b]))
        for a in sub.initial:
            trans.add((p, None, rename[a]))
        for b in sub.final:
            trans.add((rename[b], None, q))
    merged = au.make_nfa(states, nfa.initial, nfa.final, trans)
    return au.nfa_trim(au.eliminate_epsilon(merged))


def glz_to_nfa(a: GlzRat) -> LabeledNfa:
    """Matrix-labeled automaton denoting the same subset of GL(2,Z)."""
    table = free_coset_table()
    states = set()
    trans = set()
    initials = set()
    finals = set()
    for c, wnfa in a.components.items():
        base = wnfa_remove_epsilon(wnfa)
        for s in base.states:
            states.add((c, s))
        for (p, letter, q) in base.transitions:
            trans.add(((c, p), PHI[letter], (c, q)))
        for f in base.final:
            finals.add((c, f))
        if c == 0:
            initials.update((c, s) for s in base.initial)
        else:
            start = ("u", c)
            states.add(start)
            initials.add(start)
            for s in base.initial:
                trans.add((start, table.reps[c], (c, s)))
    if not states:
        states = {0}
        return au.make_nfa(states, set(), set(), set())
    return au.nfa_trim(au.make_nfa(states, initials, finals, trans))


def subgroup_rewrite(nfa: LabeledNfa, sub: CosetTable) -> LabeledNfa:
    """Relabel a GL(2,Z) automaton so every label lies in the subgroup.

    Requires the accepted language to be contained in the subgroup; the
    annotated construction detects violations as initial states whose coset
    annotation is not the identity coset.
    """
    nfa = au.nfa_trim(nfa)
    if not nfa.states:
        return nfa
    alive, edges, initials_by_coset, finals = _suffix_coset_product(nfa, sub)
    bad = [c for c in initials_by_coset if c != 0]
    if bad:
        raise NotInSubgroupError(
            f"accepted elements lie in coset(s) {sorted(bad)} of the subgroup"
        )
    return _assemble_product(edges, initials_by_coset.get(0, set()), finals)


def subgroup_intersect(nfa: LabeledNfa, sub: CosetTable) -> LabeledNfa:
    """Automaton for (language of nfa) intersected with the subgroup, with all
    labels in the subgroup."""
    nfa = au.nfa_trim(nfa)
    if not nfa.states:
        return nfa
    alive, edges, initials_by_coset, finals = _suffix_coset_product(nfa, sub)
    return _assemble_product(edges, initials_by_coset.get(0, set()), finals)


def _assemble_product(edges, initials, finals) -> LabeledNfa:
    states = set(initials) | set(finals)
    trans = set()
    for (src, b, dst) in edges:
        states.add(src)
        states.add(dst)
        trans.add((src, b, dst))
    if not states:
        states = {0}
        return au.make_nfa(states, set(), set(), set())
    return au.nfa_trim(au.make_nfa(states, initials, finals, trans))


def glz_boolean(op: str, a: GlzRat, b: GlzRat) -> GlzRat:
    """Componentwise Boolean operation; cosets are disjoint, so set semantics
    reduce to the free-group algebra per component."""
    out = {}
    cosets = set(a.components) | set(b.components)
    for c in cosets:
        x = a.components.get(c)
        y = b.components.get(c)
        if op == "union":
            if x is None:
                out[c] = y
            elif y is None:
                out[c] = x
            else:
                out[c] = fg_boolean("union", x, y)
        elif op == "intersection":
            if x is not None and y is not None:
                out[c] = fg_boolean("intersection", x, y)
        elif op == "difference":
            if x is None:
                continue
            out[c] = x if y is None else fg_boolean("difference", x, y)
        else:
            raise ValueError(f"unknown boolean op {op!r}")
    return GlzRat(out)


def glz_member(g: Mat2, a: GlzRat) -> bool:
    el = sanov_decompose(g)
    comp = a.components.get(el.coset_index)
    return comp is not None and wnfa_accepts(comp, el.word)


def glz_is_empty(a: GlzRat) -> bool:
    return a.is_empty()


def glz_left_mul(h: Mat2, a: GlzRat) -> GlzRat:
    """The set h * a for h in GL(2,Z)."""
    if not in_gl2z(h):
        raise NotInGL2ZError(f"{h} is not in GL(2,Z)")
    table = free_coset_table()
    out = {}
    for c, wnfa in a.components.items():
        el = sanov_decompose(h * table.reps[c])
        out[el.coset_index] = _prepend_word(el.word, wnfa)
    return GlzRat(out)


def _prepend_word(w: str, a: WordNfa) -> WordNfa:
    if not w:
        return a
    base = wnfa_remove_epsilon(a)
    states = {("pre", i) for i in range(len(w))} | {("s", s) for s in base.states}
    trans = {(("s", p), c, ("s", q)) for (p, c, q) in base.transitions}
    for i, c in enumerate(w[:-1]):
        trans.add((("pre", i), c, ("pre", i + 1)))
    for s in base.initial:
        trans.add((("pre", len(w) - 1), w[-1], ("s", s)))
    raw = word_nfa(
        states,
        {("pre", 0)},
        {("s", s) for s in base.final},
        trans,
    )
    # the seam can create cancellations; re-canonicalize
    return canonical_form(raw)


def glz_concat(a: GlzRat, b: GlzRat) -> GlzRat:
    """Concatenation (setwise product) of two rational subsets of GL(2,Z)."""
    if a.is_empty() or b.is_empty():
        return glz_empty()
    na, nb = glz_to_nfa(a), glz_to_nfa(b)
    states = {("a", s) for s in na.states} | {("b", s) for s in nb.states}
    trans = {(("a", p), l, ("a", q)) for (p, l, q) in na.transitions} | {
        (("b", p), l, ("b", q)) for (p, l, q) in nb.transitions
    }
    for f in na.final:
        for i in nb.initial:
            trans.add(((("a", f)), None, ("b", i)))
    merged = au.make_nfa(
        states,
        {("a", s) for s in na.initial},
        {("b", s) for s in nb.final},
        trans,
    )
    return glz_from_nfa(au.nfa_trim(au.eliminate_epsilon(merged)))


def glz_enumerate(a: GlzRat, word_len: int) -> set:
    """Sample of the denoted set: all elements whose reduced word component
    has length <= word_len (complete for the denoted set restricted so)."""
    table = free_coset_table()
    out = set()
    for c, wnfa in a.components.items():
        for w in enumerate_reduced(wnfa, word_len):
            out.add(table.reps[c] * phi_word(w))
    return out


def zpow(m: Mat2) -> RatExpr:
    """Expression for all integer powers of m."""
    return concat(star(Atom(m)), star(Atom(mat_inverse(m))))


_E21 = mat2(1, 0, 1, 1)
_NEG = mat2(-1, 0, 0, -1)


def _entry11_expr(a: int) -> RatExpr:
    """Expression for the GL(2,Z) matrices with top-left entry a."""
    if a == 0:
        # derive from the top-left-of-S-translate of the bottom-row case
        return concat(Atom(mat_inverse(GEN_S)), _entry21_zero_expr())
    pieces = []
    for b0 in range(abs(a)):
        for c0 in range(abs(a)):
            for det in (1, -1):
                num = det + b0 * c0
                if num % a:
                    continue
                center = mat2(a, b0, c0, num // a)
                pieces.append(concat(zpow(_E21), Atom(center), zpow(GEN_T)))
    return union(*pieces) if pieces else au.EMPTY


def _entry21_zero_expr() -> RatExpr:
    # upper-triangular matrices: {+-1} T^Z {1, J}
    core = zpow(GEN_T)
    return union(
        core,
        concat(Atom(_NEG), core),
        concat(core, Atom(GEN_J)),
        concat(Atom(_NEG), core, Atom(GEN_J)),
    )


@lru_cache(maxsize=None)
def entry_set(i: int, j: int, a: int) -> GlzRat:
    """The rational set of GL(2,Z) matrices whose (i,j) entry equals a.

    Nonzero targets come from sandwiching one of finitely many center
    matrices between integer powers of the two unipotent generators; the
    zero case reduces to upper-triangular matrices and conjugates.
    """
    if (i, j) not in ((1, 1), (1, 2), (2, 1), (2, 2)):
        raise ValueError("entry indices must be in {1,2}")
    if (i, j) == (2, 1) and a == 0:
        return glz_from_expr(_entry21_zero_expr())
    base = _entry11_expr(a)
    s_inv = mat_inverse(GEN_S)
    if (i, j) == (1, 1):
        e = base
    elif (i, j) == (2, 1):
        e = concat(Atom(GEN_S), base)
    elif (i, j) == (1, 2):
        e = concat(base, Atom(s_inv))
    else:
        e = concat(Atom(GEN_S), base, Atom(s_inv))
    return glz_from_expr(e)
