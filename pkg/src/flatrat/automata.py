"""Label-generic NFAs and rational expressions.

Expressions denote sets of formal products of labels; labels are arbitrary
hashable values (matrices, word letters, or handles to label sets).  Epsilon
transitions (label ``None``) are used internally during construction and
eliminated before an automaton is returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable


class RatExpr:
    """Base class for rational-expression AST nodes."""

    __slots__ = ()

    def __or__(self, other):
        return union(self, other)

    def __mul__(self, other):
        return concat(self, other)


@dataclass(frozen=True)
class Empty(RatExpr):
    __slots__ = ()


@dataclass(frozen=True)
class Atom(RatExpr):
    label: Any


@dataclass(frozen=True)
class Union(RatExpr):
    children: tuple


@dataclass(frozen=True)
class Concat(RatExpr):
    children: tuple


@dataclass(frozen=True)
class Star(RatExpr):
    child: RatExpr


EMPTY = Empty()
EPSILON = Concat(())  # the empty product, denoting {identity}


def union(*exprs) -> RatExpr:
    parts = []
    for e in exprs:
        if isinstance(e, Union):
            parts.extend(e.children)
        elif not isinstance(e, Empty):
            parts.append(e)
    if not parts:
        return EMPTY
    if len(parts) == 1:
        return parts[0]
    return Union(tuple(parts))


def concat(*exprs) -> RatExpr:
    parts = []
    for e in exprs:
        if isinstance(e, Empty):
            return EMPTY
        if isinstance(e, Concat):
            parts.extend(e.children)
        else:
            parts.append(e)
    if len(parts) == 1:
        return parts[0]
    return Concat(tuple(parts))


def star(e: RatExpr) -> RatExpr:
    if isinstance(e, Empty) or e == EPSILON:
        return EPSILON
    if isinstance(e, Star):
        return e
    return Star(e)


def atoms(e: RatExpr) -> set:
    """All labels occurring in the expression."""
    if isinstance(e, Atom):
        return {e.label}
    if isinstance(e, Union):
        return set().union(*(atoms(c) for c in e.children)) if e.children else set()
    if isinstance(e, Concat):
        return set().union(*(atoms(c) for c in e.children)) if e.children else set()
    if isinstance(e, Star):
        return atoms(e.child)
    return set()


def map_labels(e: RatExpr, fn: Callable[[Any], Any]) -> RatExpr:
    if isinstance(e, Atom):
        return Atom(fn(e.label))
    if isinstance(e, Union):
        return Union(tuple(map_labels(c, fn) for c in e.children))
    if isinstance(e, Concat):
        return Concat(tuple(map_labels(c, fn) for c in e.children))
    if isinstance(e, Star):
        return Star(map_labels(e.child, fn))
    return e


def expr_is_empty(e: RatExpr) -> bool:
    """Whether the denoted set is empty (a star always contains the identity)."""
    if isinstance(e, Empty):
        return True
    if isinstance(e, Atom):
        return False
    if isinstance(e, Union):
        return all(expr_is_empty(c) for c in e.children)
    if isinstance(e, Concat):
        return any(expr_is_empty(c) for c in e.children)
    if isinstance(e, Star):
        return False
    raise TypeError(f"not a RatExpr: {e!r}")


def basis(e: RatExpr) -> set:
    """Finite basis of the denoted set: every denoted product factors over it.

    Follows the recursion B(finite) = the set itself, B(L*) = B(L),
    B(L1 | L2) = B(L1) | B(L2), and B(L1 . L2) = B(L1) | B(L2) when both are
    nonempty, else the empty basis.
    """
    if isinstance(e, Empty):
        return set()
    if isinstance(e, Atom):
        return {e.label}
    if isinstance(e, Union):
        out = set()
        for c in e.children:
            out |= basis(c)
        return out
    if isinstance(e, Concat):
        parts = [basis(c) for c in e.children]
        if any(not p and not _denotes_identity_only(c) for p, c in zip(parts, e.children)):
            return set()
        out = set()
        for p in parts:
            out |= p
        return out
    if isinstance(e, Star):
        return basis(e.child)
    raise TypeError(f"not a RatExpr: {e!r}")


def _denotes_identity_only(e: RatExpr) -> bool:
    # empty-basis expressions that still denote {identity}: empty products
    # and stars of empty sets
    if isinstance(e, Concat):
        return all(_denotes_identity_only(c) for c in e.children)
    if isinstance(e, Star):
        return expr_is_empty(e.child) or _denotes_identity_only(e.child)
    return False


@dataclass(frozen=True)
class LabeledNfa:
    """A finite automaton whose transitions carry arbitrary labels.

    ``None`` labels are epsilon transitions and appear only in intermediate
    construction stages.
    """

    states: frozenset
    initial: frozenset
    final: frozenset
    transitions: frozenset  # of (source, label, target)

    def __post_init__(self):
        for p, _, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise ValueError("transition endpoint is not a declared state")
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("initial/final not within states")

    def labels(self) -> set:
        return {lbl for _, lbl, _ in self.transitions if lbl is not None}

    def out_edges(self):
        out = {}
        for p, lbl, q in self.transitions:
            out.setdefault(p, []).append((lbl, q))
        return out


def make_nfa(states, initial, final, transitions) -> LabeledNfa:
    return LabeledNfa(
        frozenset(states), frozenset(initial), frozenset(final), frozenset(transitions)
    )


def _fresh_counter():
    return itertools.count()


def expr_to_nfa(e: RatExpr) -> LabeledNfa:
    """Thompson-style construction followed by epsilon elimination."""
    counter = _fresh_counter()

    def build(node):
        # returns (states, start, end, transitions) with unique start/end
        s, t = next(counter), next(counter)
        if isinstance(node, Empty):
            return {s, t}, s, t, set()
        if isinstance(node, Atom):
            return {s, t}, s, t, {(s, node.label, t)}
        if isinstance(node, Union):
            states, trans = {s, t}, set()
            for c in node.children:
                cs, cstart, cend, ct = build(c)
                states |= cs
                trans |= ct
                trans.add((s, None, cstart))
                trans.add((cend, None, t))
            if not node.children:
                pass  # no children: empty set
            return states, s, t, trans
        if isinstance(node, Concat):
            states, trans = {s, t}, set()
            prev = s
            for c in node.children:
                cs, cstart, cend, ct = build(c)
                states |= cs
                trans |= ct
                trans.add((prev, None, cstart))
                prev = cend
            trans.add((prev, None, t))
            return states, s, t, trans
        if isinstance(node, Star):
            cs, cstart, cend, ct = build(node.child)
            states = cs | {s, t}
            trans = set(ct)
            trans.add((s, None, cstart))
            trans.add((cend, None, t))
            trans.add((s, None, t))
            trans.add((cend, None, cstart))
            return states, s, t, trans
        raise TypeError(f"not a RatExpr: {node!r}")

    states, start, end, trans = build(e)
    nfa = make_nfa(states, {start}, {end}, trans)
    return nfa_trim(eliminate_epsilon(nfa))


def epsilon_closure(nfa: LabeledNfa, states: Iterable) -> frozenset:
    seen = set(states)
    stack = list(seen)
    eps = {}
    for p, lbl, q in nfa.transitions:
        if lbl is None:
            eps.setdefault(p, []).append(q)
    while stack:
        p = stack.pop()
        for q in eps.get(p, ()):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return frozenset(seen)


def eliminate_epsilon(nfa: LabeledNfa) -> LabeledNfa:
    closures = {p: epsilon_closure(nfa, {p}) for p in nfa.states}
    by_source = {}
    for (src, lbl, q) in nfa.transitions:
        if lbl is not None:
            by_source.setdefault(src, []).append((lbl, q))
    trans = set()
    for p in nfa.states:
        for r in closures[p]:
            for lbl, q in by_source.get(r, ()):
                trans.add((p, lbl, q))
    final = {p for p in nfa.states if closures[p] & nfa.final}
    return make_nfa(nfa.states, nfa.initial, final, trans)


def nfa_trim(nfa: LabeledNfa) -> LabeledNfa:
    """Keep only states on some path from an initial to a final state."""
    fwd = {}
    bwd = {}
    for p, lbl, q in nfa.transitions:
        fwd.setdefault(p, set()).add(q)
        bwd.setdefault(q, set()).add(p)

    def reach(seeds, edges):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            p = stack.pop()
            for q in edges.get(p, ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen

    alive = reach(nfa.initial, fwd) & reach(nfa.final, bwd)
    return make_nfa(
        alive,
        nfa.initial & alive,
        nfa.final & alive,
        {(p, l, q) for (p, l, q) in nfa.transitions if p in alive and q in alive},
    )


def is_empty(nfa: LabeledNfa) -> bool:
    """True iff no initial-to-final path exists (the empty path counts)."""
    return not nfa_trim(nfa).initial


def accepts(nfa: LabeledNfa, word) -> bool:
    """Acceptance of a label sequence (exact label matching, epsilon-free)."""
    current = epsilon_closure(nfa, nfa.initial)
    for symbol in word:
        nxt = set()
        for (p, lbl, q) in nfa.transitions:
            if p in current and lbl == symbol:
                nxt.add(q)
        current = epsilon_closure(nfa, nxt)
        if not current:
            return False
    return bool(current & nfa.final)


def reverse_nfa(nfa: LabeledNfa) -> LabeledNfa:
    return make_nfa(
        nfa.states,
        nfa.final,
        nfa.initial,
        {(q, lbl, p) for (p, lbl, q) in nfa.transitions},
    )


def relabel(nfa: LabeledNfa, fn: Callable[[Any], Any]) -> LabeledNfa:
    return make_nfa(
        nfa.states,
        nfa.initial,
        nfa.final,
        {(p, fn(lbl) if lbl is not None else None, q) for (p, lbl, q) in nfa.transitions},
    )


def _filtered(nfa: LabeledNfa, label_filter) -> LabeledNfa:
    keep = {
        (p, lbl, q)
        for (p, lbl, q) in nfa.transitions
        if lbl is not None and label_filter(lbl)
    }
    return make_nfa(nfa.states, nfa.initial, nfa.final, keep)


def between_states_expr(nfa: LabeledNfa, p, q, label_filter=None) -> RatExpr:
    """Rational expression for products of filter-passing labels along paths
    from p to q, computed by state elimination (lowest-degree state first)."""
    if p not in nfa.states or q not in nfa.states:
        raise ValueError("p and q must be states of the automaton")
    if label_filter is None:
        label_filter = lambda lbl: True
    sub = _filtered(nfa, label_filter)
    return all_pairs_exprs(sub, sources={p}, sinks={q})[(p, q)]


def all_pairs_exprs(nfa: LabeledNfa, sources=None, sinks=None) -> dict:
    """Path expressions between states by generalized state elimination.

    Returns a dict mapping (source, sink) pairs to expressions; the empty path
    from a state to itself contributes the identity.
    """
    sources = set(nfa.states if sources is None else sources)
    sinks = set(nfa.states if sinks is None else sinks)
    keep = sources | sinks
    edges = {}
    for (a, lbl, b) in nfa.transitions:
        key = (a, b)
        edges[key] = union(edges.get(key, EMPTY), Atom(lbl))

    degree = {}
    for (a, b) in edges:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    order = sorted((s for s in nfa.states if s not in keep), key=lambda s: degree.get(s, 0))

    for s in order:
        loop_star = star(edges.pop((s, s), EMPTY))
        ins = [(a, e) for (a, b), e in edges.items() if b == s and a != s]
        outs = [(b, e) for (a, b), e in edges.items() if a == s and b != s]
        for (a, _) in ins:
            edges.pop((a, s))
        for (b, _) in outs:
            edges.pop((s, b))
        for a, ein in ins:
            for b, eout in outs:
                add = concat(ein, loop_star, eout)
                key = (a, b)
                edges[key] = union(edges.get(key, EMPTY), add)

    # remaining graph only involves kept states; solve pairwise with loops
    result = {}
    kept = sorted(keep, key=repr)
    # eliminate kept states one at a time for each requested pair, on a copy
    for src in sources:
        for snk in sinks:
            work = dict(edges)
            others = [s for s in kept if s != src and s != snk]
            for s in others:
                loop_star = star(work.pop((s, s), EMPTY))
                ins = [(a, e) for (a, b), e in work.items() if b == s and a != s]
                outs = [(b, e) for (a, b), e in work.items() if a == s and b != s]
                for (a, _) in ins:
                    work.pop((a, s))
                for (b, _) in outs:
                    work.pop((s, b))
                for a, ein in ins:
                    for b, eout in outs:
                        add = concat(ein, loop_star, eout)
                        key = (a, b)
                        work[key] = union(work.get(key, EMPTY), add)
            if src == snk:
                expr = star(work.get((src, src), EMPTY))
            else:
                sstar = star(work.get((src, src), EMPTY))
                fwd = work.get((src, snk), EMPTY)
                back = work.get((snk, src), EMPTY)
                # two-state solution: s* f (t | b s* f)*
                inner = union(work.get((snk, snk), EMPTY), concat(back, sstar, fwd))
                expr = concat(sstar, fwd, star(inner))
            result[(src, snk)] = expr
    return result
