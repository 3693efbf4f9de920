"""Brute-force ground truth: bounded-length enumeration of the matrix
products denoted by automata and expressions.

The oracle is a semi-decision tool: it can certify membership with a witness
but never certifies non-membership beyond the explored bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .automata import (
    Atom,
    Concat,
    Empty,
    LabeledNfa,
    RatExpr,
    Star,
    Union,
    make_nfa,
)
from .errors import ResourceLimitError
from .linear import IDENTITY, Mat2

DEFAULT_SET_BUDGET = 200_000


@dataclass(frozen=True)
class OracleAnswer:
    member: bool
    witness: Optional[tuple]  # label sequence multiplying to the query
    bound: int

    @property
    def verdict(self) -> str:
        return "Member" if self.member else f"NotFoundUpTo({self.bound})"


def enumerate_products(nfa: LabeledNfa, max_len: int, budget: int = DEFAULT_SET_BUDGET) -> dict:
    """All products of accepted label sequences of length <= max_len.

    Returns a dict mapping each product matrix to one witness label sequence.
    Labels must be single matrices; expand set labels beforehand.
    """
    for lbl in nfa.labels():
        if not isinstance(lbl, Mat2):
            raise ValueError(f"oracle needs matrix labels, got {type(lbl).__name__}")
    out_edges = nfa.out_edges()
    found = {}
    # frontier: (state, product) -> witness, deduplicated per length layer
    frontier = {(p, IDENTITY): () for p in nfa.initial}
    seen = set(frontier)
    for p, prod in list(frontier):
        if p in nfa.final and prod not in found:
            found[prod] = ()
    for _ in range(max_len):
        nxt = {}
        for (p, prod), wit in frontier.items():
            for lbl, q in out_edges.get(p, ()):
                if lbl is None:
                    continue
                key = (q, prod * lbl)
                if key in seen:
                    continue
                seen.add(key)
                if len(seen) > budget:
                    raise ResourceLimitError("oracle state/product budget exceeded")
                nxt[key] = wit + (lbl,)
        for (q, prod), wit in nxt.items():
            if q in nfa.final and prod not in found:
                found[prod] = wit
        frontier = nxt
        if not frontier:
            break
    return found


def oracle_member(
    g: Mat2, nfa: LabeledNfa, max_len: int, budget: int = DEFAULT_SET_BUDGET
) -> OracleAnswer:
    products = enumerate_products(nfa, max_len, budget)
    if g in products:
        return OracleAnswer(True, products[g], max_len)
    return OracleAnswer(False, None, max_len)


def enumerate_expr(e: RatExpr, max_len: int, budget: int = DEFAULT_SET_BUDGET) -> set:
    """Direct evaluation of an expression: the products of length <= max_len.

    Independent of the NFA machinery; used to cross-check it.
    """

    def go(node) -> dict:
        # product -> least length
        if isinstance(node, Empty):
            return {}
        if isinstance(node, Atom):
            if not isinstance(node.label, Mat2):
                raise ValueError("expression oracle needs matrix atoms")
            return {node.label: 1} if max_len >= 1 else {}
        if isinstance(node, Union):
            out = {}
            for c in node.children:
                for m, n in go(c).items():
                    if m not in out or n < out[m]:
                        out[m] = n
            return out
        if isinstance(node, Concat):
            out = {IDENTITY: 0}
            for c in node.children:
                part = go(c)
                nxt = {}
                for m1, n1 in out.items():
                    for m2, n2 in part.items():
                        if n1 + n2 > max_len:
                            continue
                        m = m1 * m2
                        n = n1 + n2
                        if m not in nxt or n < nxt[m]:
                            nxt[m] = n
                        if len(nxt) > budget:
                            raise ResourceLimitError("expression oracle budget exceeded")
                out = nxt
            return out
        if isinstance(node, Star):
            base = go(node.child)
            out = {IDENTITY: 0}
            frontier = {IDENTITY: 0}
            while frontier:
                nxt = {}
                for m1, n1 in frontier.items():
                    for m2, n2 in base.items():
                        if n1 + n2 > max_len:
                            continue
                        m = m1 * m2
                        n = n1 + n2
                        if m not in out or n < out[m]:
                            out[m] = n
                            nxt[m] = n
                        if len(out) > budget:
                            raise ResourceLimitError("expression oracle budget exceeded")
                frontier = nxt
            return out
        raise TypeError(f"not a RatExpr: {node!r}")

    return set(go(e))


def singleton_nfa(m: Mat2) -> LabeledNfa:
    return make_nfa({0, 1}, {0}, {1}, {(0, m, 1)})
