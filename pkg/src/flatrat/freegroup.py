"""Effective Boolean algebra for rational subsets of the rank-2 free group.

Elements are reduced words over {x, X, y, Y} with X = x^-1 and Y = y^-1.
Word automata are saturated by shortcutting cancellable inverse pairs, so
that the reduced words they accept represent exactly the group image of the
original language; complements are taken inside the reduced-word universe.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .errors import ResourceLimitError

LETTERS = "xXyY"
INVERSE = {"x": "X", "X": "x", "y": "Y", "Y": "y"}

DEFAULT_DFA_BUDGET = 10**6


def invert_word(w: str) -> str:
    return "".join(INVERSE[c] for c in reversed(w))


def reduce_word(w: Iterable[str]) -> str:
    """The unique reduced word equal to w in the free group."""
    out = []
    for c in w:
        if c not in INVERSE:
            raise ValueError(f"letter {c!r} not in alphabet {LETTERS}")
        if out and out[-1] == INVERSE[c]:
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def is_reduced(w: str) -> bool:
    return all(INVERSE[a] != b for a, b in zip(w, w[1:]))


@dataclass(frozen=True)
class WordNfa:
    """NFA over the 4-letter alphabet; None labels are epsilon."""

    states: frozenset
    initial: frozenset
    final: frozenset
    transitions: frozenset  # (p, letter-or-None, q)
    saturated: bool = False
    reduced_language: bool = False


def word_nfa(states, initial, final, transitions, **flags) -> WordNfa:
    return WordNfa(
        frozenset(states), frozenset(initial), frozenset(final), frozenset(transitions), **flags
    )


def nfa_of_words(words: Iterable[str]) -> WordNfa:
    """Automaton accepting exactly the given words."""
    states = {0}
    trans = set()
    final = set()
    nxt = 1
    for w in words:
        cur = 0
        for c in w:
            trans.add((cur, c, nxt))
            states.add(nxt)
            cur = nxt
            nxt += 1
        final.add(cur)
    return word_nfa(states, {0}, final, trans)


def _eps_index(a: WordNfa):
    eps = {}
    for p, c, q in a.transitions:
        if c is None:
            eps.setdefault(p, set()).add(q)
    return eps


def _closure(seeds, eps):
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        p = stack.pop()
        for q in eps.get(p, ()):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def wnfa_trim(a: WordNfa) -> WordNfa:
    fwd, bwd = {}, {}
    for p, c, q in a.transitions:
        fwd.setdefault(p, set()).add(q)
        bwd.setdefault(q, set()).add(p)

    def reach(seeds, edges):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            s = stack.pop()
            for t in edges.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    alive = reach(a.initial, fwd) & reach(a.final, bwd)
    return replace(
        a,
        states=frozenset(alive),
        initial=a.initial & alive,
        final=a.final & alive,
        transitions=frozenset(t for t in a.transitions if t[0] in alive and t[2] in alive),
    )


def wnfa_remove_epsilon(a: WordNfa) -> WordNfa:
    eps = _eps_index(a)
    closures = {p: _closure({p}, eps) for p in a.states}
    by_source = {}
    for p, c, q in a.transitions:
        if c is not None:
            by_source.setdefault(p, []).append((c, q))
    trans = set()
    for p in a.states:
        for r in closures[p]:
            for c, q in by_source.get(r, ()):
                trans.add((p, c, q))
    final = frozenset(p for p in a.states if closures[p] & a.final)
    return replace(a, transitions=frozenset(trans), final=final)


def wnfa_accepts(a: WordNfa, w: str) -> bool:
    eps = _eps_index(a)
    current = _closure(a.initial, eps)
    for c in w:
        nxt = set()
        for p, lbl, q in a.transitions:
            if lbl == c and p in current:
                nxt.add(q)
        current = _closure(nxt, eps)
        if not current:
            return False
    return bool(current & a.final)


def wnfa_is_empty(a: WordNfa) -> bool:
    return not wnfa_trim(a).initial


def benois_saturate(a: WordNfa, budget: int = DEFAULT_DFA_BUDGET) -> WordNfa:
    """Close the automaton under shortcutting of cancellable inverse pairs.

    Whenever p -c-> r, r' -c^-1-> q and r' is epsilon-reachable from r, an
    epsilon transition p -> q is added; this repeats to a fixpoint.  For every
    reduced word w, the result accepts w iff some accepted word of the input
    reduces to w.
    """
    eps_pairs = set()  # direct epsilon edges (p, q)
    for p, c, q in a.transitions:
        if c is None:
            eps_pairs.add((p, q))
    by_label = {}
    for p, c, q in a.transitions:
        if c is not None:
            by_label.setdefault(c, []).append((p, q))

    def eps_reach():
        # transitive closure of eps_pairs, reflexive on states
        adj = {}
        for p, q in eps_pairs:
            adj.setdefault(p, set()).add(q)
        closed = {}
        for s in a.states:
            closed[s] = _closure({s}, adj)
        return closed

    if len(a.states) ** 2 > budget:
        raise ResourceLimitError("saturation state-pair budget exceeded")

    changed = True
    while changed:
        changed = False
        closed = eps_reach()
        for c, edges in by_label.items():
            back = by_label.get(INVERSE[c], ())
            for (p, r) in edges:
                for (r2, q) in back:
                    if r2 in closed[r] and (p, q) not in eps_pairs:
                        eps_pairs.add((p, q))
                        changed = True
    trans = set(a.transitions) | {(p, None, q) for p, q in eps_pairs}
    return replace(a, transitions=frozenset(trans), saturated=True)


_REDUCED_DFA_STATES = ("", "x", "X", "y", "Y")


def _reduced_universe_edges():
    # DFA of reduced words: state = last letter (or none); forbid inverses
    edges = {}
    for s in _REDUCED_DFA_STATES:
        for c in LETTERS:
            if s and INVERSE[s] == c:
                continue
            edges[(s, c)] = c
    return edges


def fg_restrict_reduced(a: WordNfa) -> WordNfa:
    """Intersect with the regular language of reduced words."""
    base = wnfa_remove_epsilon(a)
    edges = _reduced_universe_edges()
    states = {(p, "") for p in base.initial}
    trans = set()
    stack = list(states)
    while stack:
        (p, s) = stack.pop()
        for (p0, c, q) in base.transitions:
            if p0 != p or (s, c) not in edges:
                continue
            tgt = (q, edges[(s, c)])
            if tgt not in states:
                states.add(tgt)
                stack.append(tgt)
            trans.add(((p, s), c, tgt))
    final = {(p, s) for (p, s) in states if p in base.final}
    initial = {(p, s) for (p, s) in states if p in base.initial and s == ""}
    return wnfa_trim(
        word_nfa(states, initial, final, trans, saturated=a.saturated, reduced_language=True)
    )


def canonical_form(a: WordNfa, budget: int = DEFAULT_DFA_BUDGET) -> WordNfa:
    """Saturate and restrict: the reduced words of the group image."""
    if a.reduced_language:
        return a
    return fg_restrict_reduced(benois_saturate(a, budget))


def _determinize(a: WordNfa, budget: int) -> tuple:
    """Subset construction; returns (states, initial, finals, delta) with a
    total transition function over the 4-letter alphabet (empty set = sink)."""
    base = wnfa_remove_epsilon(a)
    by_state = {}
    for p, c, q in base.transitions:
        by_state.setdefault((p, c), set()).add(q)
    start = frozenset(base.initial)
    states = {start}
    delta = {}
    stack = [start]
    while stack:
        cur = stack.pop()
        for c in LETTERS:
            tgt = frozenset(q for p in cur for q in by_state.get((p, c), ()))
            delta[(cur, c)] = tgt
            if tgt not in states:
                states.add(tgt)
                if len(states) > budget:
                    raise ResourceLimitError("determinization budget exceeded")
                stack.append(tgt)
    finals = {s for s in states if s & base.final}
    return states, start, finals, delta


def fg_boolean(op: str, a: WordNfa, b: WordNfa, budget: int = DEFAULT_DFA_BUDGET) -> WordNfa:
    """Union/intersection/difference of reduced-language automata.

    The complement implicit in a difference is relative to the universe of
    reduced words, which is what makes this the group-level Boolean algebra.
    """
    if not (a.reduced_language and b.reduced_language):
        raise ValueError("fg_boolean needs reduced_language inputs; canonicalize first")
    if op == "union":
        ar = wnfa_remove_epsilon(a)
        br = wnfa_remove_epsilon(b)
        states = {("a", s) for s in ar.states} | {("b", s) for s in br.states}
        trans = {(("a", p), c, ("a", q)) for (p, c, q) in ar.transitions} | {
            (("b", p), c, ("b", q)) for (p, c, q) in br.transitions
        }
        return wnfa_trim(
            word_nfa(
                states,
                {("a", s) for s in ar.initial} | {("b", s) for s in br.initial},
                {("a", s) for s in ar.final} | {("b", s) for s in br.final},
                trans,
                reduced_language=True,
            )
        )
    if op not in ("intersection", "difference"):
        raise ValueError(f"unknown boolean op {op!r}")
    ar = wnfa_remove_epsilon(a)
    dstates, dstart, dfinals, delta = _determinize(b, budget)
    good = (lambda s: s in dfinals) if op == "intersection" else (lambda s: s not in dfinals)
    states = {(p, dstart) for p in ar.initial}
    trans = set()
    stack = list(states)
    while stack:
        (p, d) = stack.pop()
        for (p0, c, q) in ar.transitions:
            if p0 != p:
                continue
            tgt = (q, delta[(d, c)])
            if tgt not in states:
                states.add(tgt)
                if len(states) > budget:
                    raise ResourceLimitError("product construction budget exceeded")
                stack.append(tgt)
            trans.add(((p, d), c, tgt))
    final = {(p, d) for (p, d) in states if p in ar.final and good(d)}
    initial = {(p, d) for (p, d) in states if p in ar.initial and d == dstart}
    return wnfa_trim(word_nfa(states, initial, final, trans, reduced_language=True))


def fg_member(w: str, a: WordNfa, budget: int = DEFAULT_DFA_BUDGET) -> bool:
    """Whether the reduced word w lies in the group image of the accepted set."""
    w = reduce_word(w)
    if a.reduced_language:
        return wnfa_accepts(a, w)
    return wnfa_accepts(benois_saturate(a, budget), w)


def enumerate_reduced(a: WordNfa, max_len: int) -> set:
    """Reduced forms of all accepted words of length <= max_len (oracle)."""
    base = wnfa_remove_epsilon(a)
    by_state = {}
    for p, c, q in base.transitions:
        by_state.setdefault(p, []).append((c, q))
    out = set()
    frontier = {(p, ""): None for p in base.initial}
    if any(p in base.final for p in base.initial):
        out.add("")
    for _ in range(max_len):
        nxt = {}
        for (p, w) in frontier:
            for c, q in by_state.get(p, ()):
                key = (q, reduce_word(w + c))
                nxt[key] = None
        for (q, w) in nxt:
            if q in base.final:
                out.add(w)
        frontier = nxt
        if not frontier:
            break
    return out


def all_reduced_words(max_len: int) -> list:
    out = [""]
    frontier = [""]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for c in LETTERS:
                if w and INVERSE[w[-1]] == c:
                    continue
                nxt.append(w + c)
        out.extend(nxt)
        frontier = nxt
    return out


def universe_nfa() -> WordNfa:
    """Automaton of all reduced words."""
    edges = _reduced_universe_edges()
    states = set(_REDUCED_DFA_STATES)
    trans = {(s, c, t) for (s, c), t in edges.items()}
    return word_nfa(states, {""}, states, trans, saturated=True, reduced_language=True)
