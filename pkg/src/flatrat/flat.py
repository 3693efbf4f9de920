"""Flat rational sets over GL(2,Z) inside GL(2,Q).

A flat expression is a finite union of branches L0 g1 L1 ... gt Lt with
rational factors Li over a declared label monoid and matrix connectors gi.
Over GL(2,Z) every such set normalizes to a finite union of cosets
rep * K with pairwise distinct canonical representatives and K rational in
GL(2,Z); differences and intersections then reduce to the GL(2,Z) algebra
representative by representative.  Membership of a nonsingular matrix in a
flat set over the monoid of |det| > 1 matrices is decided by bounding how
often determinant-growing labels can occur and flattening a counter product
automaton back into the GL(2,Z) normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import automata as au
from .automata import Atom, EPSILON, RatExpr, concat, expr_is_empty
from .commens import push_right
from .errors import SingularMatrixError, UnsupportedInputError
from .glz import (
    GlzRat,
    _expr_to_matrix_nfa,
    glz_boolean,
    glz_concat,
    glz_from_expr,
    glz_from_nfa,
    glz_left_mul,
    glz_member,
    glz_one,
)
from .linear import (
    GEN_J,
    IDENTITY,
    MONOID_GL2Z,
    MONOID_P2Q,
    Mat2,
    central,
    coset_canonical,
    diag,
    in_gl2z,
    label_in_monoid,
    mat_inverse,
    smith_normal_form,
)


@dataclass(frozen=True)
class FlatBranch:
    """One alternating chain: factors[0] g1 factors[1] ... gt factors[t]."""

    factors: tuple  # of RatExpr, length t+1
    connectors: tuple  # of Mat2, length t

    def __post_init__(self):
        if len(self.factors) != len(self.connectors) + 1:
            raise ValueError("need one more factor than connectors")


@dataclass(frozen=True)
class FlatExpr:
    branches: tuple  # of FlatBranch
    monoid: str = MONOID_GL2Z


def flat_branch(*items) -> FlatBranch:
    """Branch from an alternating item list; matrices are connectors,
    expressions are factors, and missing factors default to {identity}."""
    factors = []
    connectors = []
    pending = None
    for item in items:
        if isinstance(item, Mat2):
            factors.append(EPSILON if pending is None else pending)
            pending = None
            connectors.append(item)
        else:
            if pending is not None:
                raise ValueError("two adjacent factors; combine them first")
            pending = item
    factors.append(EPSILON if pending is None else pending)
    return FlatBranch(tuple(factors), tuple(connectors))


def validate_labels(e: FlatExpr):
    """Every factor atom must be admissible for the declared monoid."""
    for branch in e.branches:
        for f in branch.factors:
            for lbl in au.atoms(f):
                if isinstance(lbl, GlzRat):
                    continue  # denotes a subset of GL(2,Z)
                if not isinstance(lbl, Mat2):
                    raise UnsupportedInputError(f"unresolved label {lbl!r}")
                if not label_in_monoid(lbl, e.monoid):
                    raise UnsupportedInputError(
                        f"label {lbl} is not admissible in monoid {e.monoid}"
                    )


@dataclass(frozen=True)
class NormalFlat:
    """Union of cosets rep * K with canonical, pairwise distinct reps."""

    pairs: tuple  # of (Mat2, GlzRat)

    def is_empty(self) -> bool:
        return not self.pairs


def _merge(pairs) -> NormalFlat:
    by_rep = {}
    for rep, K in pairs:
        if K.is_empty():
            continue
        if rep in by_rep:
            by_rep[rep] = glz_boolean("union", by_rep[rep], K)
        else:
            by_rep[rep] = K
    return NormalFlat(tuple(sorted(by_rep.items(), key=lambda kv: repr(kv[0]))))


def nf_union(a: NormalFlat, b: NormalFlat) -> NormalFlat:
    return _merge(a.pairs + b.pairs)


def nf_push(nf: NormalFlat, g: Mat2) -> NormalFlat:
    """Right-translate a normal form by g, re-canonicalizing representatives."""
    out = []
    for a, K in nf.pairs:
        for gp, Kp in push_right(K, g):
            moved = a * gp
            rep = coset_canonical(moved)
            residue = mat_inverse(rep) * moved
            out.append((rep, glz_left_mul(residue, Kp)))
    return _merge(out)


def nf_concat_glz(nf: NormalFlat, gr: GlzRat) -> NormalFlat:
    if gr.is_empty():
        return NormalFlat(())
    return _merge((a, glz_concat(K, gr)) for a, K in nf.pairs)


def nf_member(g: Mat2, nf: NormalFlat) -> bool:
    if g.det() == 0:
        return False
    rep = coset_canonical(g)
    for a, K in nf.pairs:
        if a == rep:
            return glz_member(mat_inverse(a) * g, K)
    return False


def normalize_flat(e: FlatExpr) -> NormalFlat:
    """Normal form of a flat expression over GL(2,Z): left to right, factors
    extend the GL(2,Z) part and connectors are pushed across it."""
    validate_labels(e)
    total = NormalFlat(())
    for branch in e.branches:
        for g in branch.connectors:
            if g.det() == 0:
                raise SingularMatrixError(f"connector {g} is singular")
        nf = nf_concat_glz(
            NormalFlat(((IDENTITY, glz_one()),)), glz_from_expr(branch.factors[0])
        )
        for g, factor in zip(branch.connectors, branch.factors[1:]):
            nf = nf_push(nf, g)
            if nf.is_empty():
                break
            nf = nf_concat_glz(nf, glz_from_expr(factor))
            if nf.is_empty():
                break
        total = nf_union(total, nf)
    return total


def flat_difference(a: NormalFlat, b: NormalFlat) -> NormalFlat:
    other = dict(b.pairs)
    out = []
    for rep, K in a.pairs:
        if rep in other:
            out.append((rep, glz_boolean("difference", K, other[rep])))
        else:
            out.append((rep, K))
    return _merge(out)


def flat_intersection(a: NormalFlat, b: NormalFlat) -> NormalFlat:
    return flat_difference(a, flat_difference(a, b))


@dataclass(frozen=True)
class BoolComb:
    """AST over flat-expression leaves with union/intersection/difference."""

    op: str  # "leaf" | "union" | "intersection" | "difference"
    leaf: Optional[FlatExpr] = None
    left: Optional["BoolComb"] = None
    right: Optional["BoolComb"] = None


def bool_leaf(e: FlatExpr) -> BoolComb:
    return BoolComb("leaf", leaf=e)


def bool_node(op: str, left: BoolComb, right: BoolComb) -> BoolComb:
    if op not in ("union", "intersection", "difference"):
        raise ValueError(f"unknown boolean operator {op!r}")
    return BoolComb(op, left=left, right=right)


def eval_bool_comb(c: BoolComb) -> NormalFlat:
    if c.op == "leaf":
        return normalize_flat(c.leaf)
    left = eval_bool_comb(c.left)
    right = eval_bool_comb(c.right)
    if c.op == "union":
        return nf_union(left, right)
    if c.op == "intersection":
        return flat_intersection(left, right)
    return flat_difference(left, right)


def bool_comb_empty(c: BoolComb) -> bool:
    return eval_bool_comb(c).is_empty()


# ---------------------------------------------------------------------------
# Membership for nonsingular targets in flat sets over the |det| > 1 monoid.
# ---------------------------------------------------------------------------


def connector_split(h: Mat2):
    """Factor a nonsingular connector as (1/z) * (z*h) with z the smallest
    natural number making z*h admissible (unimodular integral or |det| > 1)."""
    if h.det() == 0:
        raise SingularMatrixError(f"connector {h} is singular")
    z = 1
    while True:
        cand = z * h
        if in_gl2z(cand) or abs(cand.det()) > 1:
            return Fraction(1, z), cand
        z += 1


def counter_bound_k(det_abs: Fraction, t_min: Fraction) -> int:
    """Largest k with t_min^k <= det_abs, computed exactly."""
    if t_min <= 1:
        raise ValueError("t_min must exceed 1")
    k = 0
    power = Fraction(1)
    while power * t_min <= det_abs:
        power *= t_min
        k += 1
    return k


@dataclass(frozen=True)
class FlatMemberInstance:
    """A membership query reduced to a positive diagonal target and a plain
    rational expression, with the counter bound for det-growing labels."""

    target: Mat2
    expr: RatExpr
    t_min: Optional[Fraction]
    k: int


def prepare_instance(g: Mat2, branch: FlatBranch) -> Optional[FlatMemberInstance]:
    """Steps shared by every branch: move the target to diagonal form, split
    connectors into a leading scalar and admissible residues, then clear the
    scalar so the target is a positive integral diagonal matrix.  Returns
    None when scaling already rules the branch out."""
    snf = smith_normal_form(g)
    lead = Fraction(1, snf.r) * mat_inverse(snf.e)
    trail = mat_inverse(snf.f)
    factors = (EPSILON,) + branch.factors + (EPSILON,)
    connectors = (lead,) + branch.connectors + (trail,)

    scalar = Fraction(1)
    pieces = [factors[0]]
    for h, factor in zip(connectors, factors[1:]):
        rho, residual = connector_split(h)
        scalar *= rho
        if not residual.is_identity():
            pieces.append(Atom(residual))
        pieces.append(factor)
    expr = concat(*pieces)

    p, q = scalar.numerator, scalar.denominator
    target = diag(q, q * snf.q)
    if p > 1:
        expr = concat(Atom(central(p)), expr)
    if target.a22 < 0:
        target = target * GEN_J
        expr = concat(expr, Atom(GEN_J))

    nfa = au.nfa_trim(_expr_to_matrix_nfa(expr))
    big_dets = [abs(l.det()) for l in nfa.labels() if abs(l.det()) > 1]
    det_abs = abs(target.det())
    if not big_dets:
        return FlatMemberInstance(target, expr, None, 0)
    t_min = min(big_dets)
    k = counter_bound_k(det_abs, t_min) if det_abs > 1 else 0
    return FlatMemberInstance(target, expr, t_min, k)


def _counter_member(inst: FlatMemberInstance) -> bool:
    """Counter-product decision: levels count det-growing transitions, the
    per-level GL(2,Z) path languages are composed into normal forms by
    dynamic programming, and the target is looked up in the result."""
    target = inst.target
    nfa = au.nfa_trim(_expr_to_matrix_nfa(inst.expr))
    if not nfa.states:
        return False
    conns = [(u, h, v) for (u, h, v) in nfa.transitions if abs(h.det()) > 1]
    gl_sub = au.make_nfa(
        nfa.states,
        nfa.initial,
        nfa.final,
        {(u, h, v) for (u, h, v) in nfa.transitions if abs(h.det()) <= 1},
    )
    sources = set(nfa.initial) | {v for (_, _, v) in conns}
    sinks = set(nfa.final) | {u for (u, _, _) in conns}
    exprs = au.all_pairs_exprs(gl_sub, sources=sources, sinks=sinks)
    glz_cache = {}

    def seg(p, q) -> Optional[GlzRat]:
        e = exprs.get((p, q))
        if e is None or expr_is_empty(e):
            return None
        if (p, q) not in glz_cache:
            glz_cache[(p, q)] = glz_from_expr(e)
        return glz_cache[(p, q)]

    def check_final(levels) -> bool:
        for nf in levels.values():
            if nf_member(target, nf):
                return True
        return False

    start = NormalFlat(((IDENTITY, glz_one()),))
    level = {p: start for p in nfa.initial}
    # membership at level 0: initial segment straight to a final state
    for p, nf in level.items():
        for f in nfa.final:
            s = seg(p, f)
            if s is not None and nf_member(target, nf_concat_glz(nf, s)):
                return True
    for _ in range(inst.k):
        nxt = {}
        for (u, h, v) in conns:
            for p, nf in level.items():
                s = seg(p, u)
                if s is None:
                    continue
                moved = nf_push(nf_concat_glz(nf, s), h)
                if moved.is_empty():
                    continue
                nxt[v] = nf_union(nxt.get(v, NormalFlat(())), moved)
        level = nxt
        if not level:
            break
        for p, nf in level.items():
            for f in nfa.final:
                s = seg(p, f)
                if s is not None and nf_member(target, nf_concat_glz(nf, s)):
                    return True
    return False


def flat_member(g: Mat2, e: FlatExpr) -> bool:
    """Membership of a nonsingular rational matrix in a flat rational set
    whose factors live in the |det| > 1 monoid (or GL(2,Z))."""
    if g.det() == 0:
        raise SingularMatrixError("use the singular decision for det 0 targets")
    if e.monoid not in (MONOID_GL2Z, MONOID_P2Q):
        raise UnsupportedInputError(
            f"nonsingular membership needs GL2Z or P2Q factors, got {e.monoid}"
        )
    validate_labels(e)
    for branch in e.branches:
        inst = prepare_instance(g, branch)
        if inst is None:
            continue
        if inst.t_min is None:
            # all labels unimodular: the branch denotes a subset of GL(2,Z)
            # translates; target must be unimodular too after reduction
            if not in_gl2z(inst.target):
                continue
            if glz_member(inst.target, glz_from_nfa(_expr_to_matrix_nfa(inst.expr))):
                return True
            continue
        if _counter_member(inst):
            return True
    return False
