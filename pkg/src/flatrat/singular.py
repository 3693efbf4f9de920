"""Membership decisions for singular targets.

Every matrix accepted along a path that mixes unimodular labels, natural
central scalars, and the rank-one projector s0 = [[1,0],[0,0]] collapses to
r * f1 * s0 * f2 with f1, f2 unimodular: s0 * M * s0 equals M[1,1] * s0, so
interior segments contribute only a scalar.  The decision therefore
(1) splits every label into unimodular / central / s0 parts, (2) tracks
accumulated central scalars through the divisors of the target gcd,
(3) floods the automaton with the unimodular path languages between
checkpoints, (4) saturates shortcut s0-transitions whose scalars divide the
target gcd, and (5) runs divisor tests on the surviving length-three paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from . import automata as au
from .automata import Atom, LabeledNfa, RatExpr, concat, expr_is_empty
from .errors import SingularMatrixError, UnsupportedInputError
from .flat import FlatBranch, FlatExpr, validate_labels
from .glz import (
    GlzRat,
    _expr_to_matrix_nfa,
    entry_set,
    glz_boolean,
    glz_from_expr,
    glz_member,
    glz_one,
)
from .linear import (
    IDENTITY,
    MONOID_P,
    MONOID_PPRIME,
    S0,
    ZERO,
    LabelClass,
    Mat2,
    central,
    classify_label,
    diag,
    in_gl2z,
    smith_normal_form,
)


@dataclass(frozen=True)
class ScaledS0:
    """Transition label r * s0 = [[r,0],[0,0]]."""

    r: int

    def matrix(self) -> Mat2:
        return central(self.r) * S0


@dataclass(frozen=True)
class SingularInstance:
    """A branch prepared for the singular decision: integral target, the
    split-label automaton, the gcd of the target entries, and the bound on
    non-natural central scalars (one per connector)."""

    target: Mat2
    automaton: LabeledNfa
    target_gcd: int
    rho: int


def _split_label(m: Mat2, target_zero: bool) -> RatExpr:
    """Expression for a single monoid label in terms of unimodular matrices,
    natural central scalars, the projector s0, and the zero matrix."""
    cls = classify_label(m)
    if cls in (LabelClass.IDENTITY, LabelClass.GL2Z):
        return Atom(m)
    if cls == LabelClass.ZERO_MATRIX:
        return Atom(ZERO)
    if m.is_central():
        if target_zero:
            return Atom(IDENTITY)  # invertible scalars cannot help reach 0
        return Atom(m)
    if cls == LabelClass.SINGULAR_INTEGER:
        s = smith_normal_form(m)
        parts = []
        if s.r != 1 and not target_zero:
            parts.append(Atom(central(s.r)))
        if not s.e.is_identity():
            parts.append(Atom(s.e))
        parts.append(Atom(S0))
        if not s.f.is_identity():
            parts.append(Atom(s.f))
        return concat(*parts)
    raise UnsupportedInputError(f"label {m} is outside the singular fragment")


def _split_connector(m: Mat2, target_zero: bool):
    """Split a connector into (positive scalar, expression piece).

    Nonsingular connectors whose Smith q has |q| >= 2 keep a diagonal
    residue; such residues are tolerated only on branches that cannot
    produce singular products at all."""
    if m.is_zero():
        return None, Atom(ZERO)
    s = smith_normal_form(m)
    parts = []
    if not s.e.is_identity():
        parts.append(Atom(s.e))
    parts.append(Atom(diag(1, s.q)))  # unimodular for |q| = 1, s0 for q = 0
    if not s.f.is_identity():
        parts.append(Atom(s.f))
    scalar = None if target_zero else s.r
    return scalar, concat(*parts)


def build_singular_instance(g: Mat2, branch: FlatBranch, target_zero: bool):
    """Normalize one branch: split labels, collect connector scalars, scale
    the target to integral form.  Returns the prepared instance, or None
    when scaling already rules the branch out."""
    scalar = Fraction(1)
    pieces = [_split_expr(branch.factors[0], target_zero)]
    for conn, factor in zip(branch.connectors, branch.factors[1:]):
        rho, piece = _split_connector(conn, target_zero)
        if rho is not None:
            scalar *= rho
        pieces.append(piece)
        pieces.append(_split_expr(factor, target_zero))
    expr = concat(*pieces)

    if target_zero:
        target = g
    else:
        z = scalar.denominator
        target = z * g
        if not target.is_integral():
            return None
        lead = scalar * z  # = numerator, a natural number
        if lead > 1:
            expr = concat(Atom(central(int(lead))), expr)

    nfa = au.nfa_trim(_expr_to_matrix_nfa(expr))
    if not nfa.states:
        return None
    t = gcd(*(abs(int(x)) for x in target.entries())) if not target.is_zero() else 0
    return SingularInstance(target, nfa, t, len(branch.connectors))


def _split_expr(e: RatExpr, target_zero: bool) -> RatExpr:
    if isinstance(e, Atom):
        if isinstance(e.label, GlzRat):
            return e
        return _split_label(e.label, target_zero)
    if isinstance(e, au.Union):
        return au.Union(tuple(_split_expr(c, target_zero) for c in e.children))
    if isinstance(e, au.Concat):
        return au.Concat(tuple(_split_expr(c, target_zero) for c in e.children))
    if isinstance(e, au.Star):
        return au.Star(_split_expr(e.child, target_zero))
    return e


def _positive_divisors(n: int) -> list:
    n = abs(n)
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def _divides(x: int, t: int) -> bool:
    if x == 0:
        return t == 0
    return t % x == 0


def _lift_scalars(nfa: LabeledNfa, t: int) -> LabeledNfa:
    """Product with the divisor lattice of t: states carry the central scalar
    accumulated since the last s0 discharge.  Central labels become identity
    moves, s0 labels discharge the scalar into a ScaledS0 edge, and branches
    whose scalar stops dividing t are dropped (they cannot reach the target)."""
    if t == 0:
        # scalars are irrelevant for the zero target
        trans = set()
        for (u, lbl, v) in nfa.transitions:
            if isinstance(lbl, Mat2) and lbl == S0:
                trans.add(((u, 1), ScaledS0(1), (v, 1)))
            elif isinstance(lbl, Mat2) and lbl.is_central() and not in_gl2z(lbl):
                trans.add(((u, 1), IDENTITY, (v, 1)))
            else:
                trans.add(((u, 1), lbl, (v, 1)))
        return au.nfa_trim(
            au.make_nfa(
                {(s, 1) for s in nfa.states},
                {(s, 1) for s in nfa.initial},
                {(s, 1) for s in nfa.final},
                trans,
            )
        )
    divisors = set(_positive_divisors(t))
    states = {(s, 1) for s in nfa.initial}
    trans = set()
    stack = list(states)
    out_edges = nfa.out_edges()
    while stack:
        (s, m) = stack.pop()
        for lbl, v in out_edges.get(s, ()):
            if isinstance(lbl, Mat2) and lbl == S0:
                new = ((s, m), ScaledS0(m), (v, 1))
            elif isinstance(lbl, Mat2) and lbl.is_central() and not in_gl2z(lbl):
                r = int(lbl.a11)
                m2 = m * r
                if m2 not in divisors:
                    continue
                new = ((s, m), IDENTITY, (v, m2))
            else:
                new = ((s, m), lbl, (v, m))
            trans.add(new)
            tgt = new[2]
            if tgt not in states:
                states.add(tgt)
                stack.append(tgt)
    return au.nfa_trim(
        au.make_nfa(
            states,
            {(s, 1) for s in nfa.initial if (s, 1) in states},
            {sm for sm in states if sm[0] in nfa.final},
            trans,
        )
    )


def _pair_languages(nfa: LabeledNfa, pairs=None) -> dict:
    """Unimodular path languages between state pairs, identity factored out:
    maps (p, q) to (GlzRat-or-None, identity-path-exists)."""
    h_sub = au.make_nfa(
        nfa.states,
        nfa.initial,
        nfa.final,
        {
            (u, lbl, v)
            for (u, lbl, v) in nfa.transitions
            if isinstance(lbl, Mat2) and in_gl2z(lbl)
        },
    )
    if pairs is None:
        sources = sinks = set(nfa.states)
        pairs = {(p, q) for p in sources for q in sinks}
    else:
        sources = {p for p, _ in pairs}
        sinks = {q for _, q in pairs}
    exprs = au.all_pairs_exprs(h_sub, sources=sources, sinks=sinks)
    out = {}
    for (p, q) in pairs:
        e = exprs.get((p, q))
        if e is None or expr_is_empty(e):
            continue
        L = glz_from_expr(e)
        has_id = glz_member(IDENTITY, L)
        if has_id:
            L = glz_boolean("difference", L, glz_one())
        out[(p, q)] = (None if L.is_empty() else L, has_id)
    return out


def flood_h_transitions(nfa: LabeledNfa, pairs=None) -> LabeledNfa:
    """First flooding: for state pairs, add a set-labeled transition carrying
    the language of unimodular-label paths between them; the identity is
    factored out into its own transition."""
    added = set()
    for (p, q), (L, has_id) in _pair_languages(nfa, pairs).items():
        if has_id:
            added.add((p, IDENTITY, q))
        if L is not None:
            added.add((p, L, q))
    return au.make_nfa(nfa.states, nfa.initial, nfa.final, set(nfa.transitions) | added)


def _bipartite(nfa_lifted: LabeledNfa):
    """Collapse to the alternating shape: p-nodes emit set transitions, q-nodes
    emit scaled-s0 transitions.  States mixing both roles are split."""
    s0_edges = [
        (u, lbl, v) for (u, lbl, v) in nfa_lifted.transitions if isinstance(lbl, ScaledS0)
    ]
    psources = set(nfa_lifted.initial) | {v for (_, _, v) in s0_edges}
    qsinks = set(nfa_lifted.final) | {u for (u, _, _) in s0_edges}
    pairs = {(p, q) for p in psources for q in qsinks}
    flooded = flood_h_transitions(nfa_lifted, pairs=pairs)
    new_edges = flooded.transitions - nfa_lifted.transitions

    states = {("p", x) for x in psources} | {("q", y) for y in qsinks}
    trans = set()
    for (p, lbl, q) in new_edges:
        trans.add((("p", p), lbl, ("q", q)))
    for (u, lbl, v) in s0_edges:
        trans.add((("q", u), lbl, ("p", v)))
    return au.make_nfa(
        states,
        {("p", x) for x in nfa_lifted.initial},
        {("q", y) for y in nfa_lifted.final},
        trans,
    )


def flood_shortcuts(nfa: LabeledNfa, t: int) -> LabeledNfa:
    """Second flooding: saturate shortcut transitions across s0-s0 patterns.

    For q' -(r s0)-> p -(L)-> q -(r' s0)-> p' and an integer z with z = 0 only
    for the zero target, r*z*r' dividing t, and L meeting the set of matrices
    with top-left entry z, add q' -(r z r' s0)-> p'.  The divisors of t are
    finite, so this terminates."""
    zs = [0] if t == 0 else [d for d in _positive_divisors(t)] + [
        -d for d in _positive_divisors(t)
    ]
    trans = set(nfa.transitions)

    def mid_ok(lbl, z) -> bool:
        if isinstance(lbl, GlzRat):
            return not glz_boolean("intersection", lbl, entry_set(1, 1, z)).is_empty()
        if isinstance(lbl, Mat2) and lbl == IDENTITY:
            return z == 1
        return False

    changed = True
    while changed:
        changed = False
        s0_out = {}
        mids = {}
        for (a, lbl, b) in trans:
            if isinstance(lbl, ScaledS0):
                s0_out.setdefault(a, []).append((lbl.r, b))
            else:
                mids.setdefault(a, []).append((lbl, b))
        for (qp, lbl1, p) in list(trans):
            if not isinstance(lbl1, ScaledS0):
                continue
            for (mid_lbl, q) in mids.get(p, ()):
                for (r2, pp) in s0_out.get(q, ()):
                    for z in zs:
                        rr = lbl1.r * z * r2
                        if not _divides(rr, t):
                            continue
                        cand = (qp, ScaledS0(rr), pp)
                        if cand in trans:
                            continue
                        if mid_ok(mid_lbl, z):
                            trans.add(cand)
                            changed = True
    return au.make_nfa(nfa.states, nfa.initial, nfa.final, trans)


def _primitive(vec):
    g = gcd(abs(vec[0]), abs(vec[1]))
    return (vec[0] // g, vec[1] // g)


@lru_cache(maxsize=None)
def _column_set(a: int, b: int) -> GlzRat:
    return glz_boolean("intersection", entry_set(1, 1, a), entry_set(2, 1, b))


@lru_cache(maxsize=None)
def _row_set(c: int, d: int) -> GlzRat:
    return glz_boolean("intersection", entry_set(1, 1, c), entry_set(1, 2, d))


def final_test(r: int, L1: GlzRat, L2: GlzRat, g: Mat2) -> bool:
    """Does some f1 in L1 and f2 in L2 satisfy f1 * (r s0) * f2 = g?

    Writing (a,b) for the first column of f1 and (c,d) for the first row of
    f2, the product is r * [[ac, ad], [bc, bd]]; the question becomes a
    rank-one factorization of g/r with entries constrained to entry sets,
    enumerated over divisor splittings (negative divisors included, ordered
    by absolute value)."""
    if g.det() != 0:
        raise SingularMatrixError("final test needs a singular target")
    if r == 0:
        return g.is_zero() and not L1.is_empty() and not L2.is_empty()
    if g.is_zero():
        return False  # first column of f1 and first row of f2 never vanish
    scaled = Fraction(1, r) * g
    if not scaled.is_integral():
        return False
    g11, g12, g21, g22 = scaled.int_entries()
    col = (g11, g21) if (g11, g21) != (0, 0) else (g12, g22)
    row = (g11, g12) if (g11, g12) != (0, 0) else (g21, g22)
    u = _primitive(col)
    v = _primitive(row)
    d0 = gcd(gcd(abs(g11), abs(g12)), gcd(abs(g21), abs(g22)))
    # the matrix must equal sign * d0 * (u outer v)
    sign = None
    for (gij, ui, vj) in (
        (g11, u[0], v[0]),
        (g12, u[0], v[1]),
        (g21, u[1], v[0]),
        (g22, u[1], v[1]),
    ):
        expected = d0 * ui * vj
        if expected == 0:
            if gij != 0:
                return False
            continue
        s = 1 if gij == expected else -1 if gij == -expected else None
        if s is None:
            return False
        if sign is None:
            sign = s
        elif sign != s:
            return False
    if sign is None:
        return False
    for alpha in _positive_divisors(d0):
        beta = d0 // alpha
        for s1, s2 in ((1, sign), (-1, -sign)):
            a, b = s1 * alpha * u[0], s1 * alpha * u[1]
            c, d = s2 * beta * v[0], s2 * beta * v[1]
            if glz_boolean("intersection", L1, _column_set(a, b)).is_empty():
                continue
            if glz_boolean("intersection", L2, _row_set(c, d)).is_empty():
                continue
            return True
    return False


def _decide_instance(inst: SingularInstance) -> bool:
    target = inst.target
    nfa = inst.automaton
    target_zero = target.is_zero()

    # zero labels: with a trim automaton, any zero transition accepts 0
    has_zero = any(
        isinstance(lbl, Mat2) and lbl.is_zero() for lbl in nfa.labels()
    )
    if target_zero and has_zero:
        return True
    nfa = au.nfa_trim(
        au.make_nfa(
            nfa.states,
            nfa.initial,
            nfa.final,
            {
                (u, lbl, v)
                for (u, lbl, v) in nfa.transitions
                if not (isinstance(lbl, Mat2) and lbl.is_zero())
            },
        )
    )
    if not nfa.states:
        return False

    has_s0 = any(isinstance(lbl, Mat2) and lbl == S0 for lbl in nfa.labels())
    poison = [
        lbl
        for lbl in nfa.labels()
        if isinstance(lbl, Mat2) and not in_gl2z(lbl) and not lbl.is_central() and lbl != S0
    ]
    if not has_s0:
        # every remaining label is invertible: no singular products at all
        return False
    if poison:
        raise UnsupportedInputError(
            "connector with |Smith q| > 1 mixed with singular labels; "
            "outside the implemented fragment"
        )

    lifted = _lift_scalars(nfa, inst.target_gcd)
    if not lifted.states:
        return False
    bip = _bipartite(lifted)
    bip = flood_shortcuts(bip, inst.target_gcd)

    set_edges = {}
    for (a, lbl, b) in bip.transitions:
        if isinstance(lbl, ScaledS0):
            continue
        L = glz_one() if isinstance(lbl, Mat2) else lbl
        key = (a, b)
        set_edges.setdefault(key, []).append(L)

    for (a, lbl, b) in bip.transitions:
        if not isinstance(lbl, ScaledS0):
            continue
        for i0 in bip.initial:
            for L1 in set_edges.get((i0, a), ()):
                for f in bip.final:
                    (_, (_, m2)) = f
                    for L2 in set_edges.get((b, f), ()):
                        if final_test(lbl.r * m2, L1, L2, target):
                            return True
    return False


def singular_member(g: Mat2, e: FlatExpr) -> bool:
    """Membership of a singular rational matrix in a flat rational set whose
    factors use unimodular matrices, natural central scalars, and integer
    det-0 matrices."""
    if g.det() != 0:
        raise SingularMatrixError("singular decision needs a det-0 target")
    if e.monoid not in (MONOID_PPRIME,):
        raise UnsupportedInputError("singular membership needs Pprime factors")
    validate_labels(e)
    if g.is_zero():
        return zero_member(FlatExpr(e.branches, MONOID_P))
    for branch in e.branches:
        inst = build_singular_instance(g, branch, target_zero=False)
        if inst is not None and _decide_instance(inst):
            return True
    return False


def zero_member(e: FlatExpr) -> bool:
    """Membership of the zero matrix: central factors may be any rationals
    since invertible scalars cannot produce zero."""
    if e.monoid not in (MONOID_P, MONOID_PPRIME):
        raise UnsupportedInputError("zero membership needs P or Pprime factors")
    validate_labels(e)
    for branch in e.branches:
        inst = build_singular_instance(ZERO, branch, target_zero=True)
        if inst is not None and _decide_instance(inst):
            return True
    return False
