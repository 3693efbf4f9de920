"""Left-coset tables for finite-index subgroups of GL(2,Z).

A table holds a membership predicate for the subgroup, a complete list of
left-coset representatives found by breadth-first search over the standard
generators, and the generator action on coset indices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .errors import ResourceLimitError
from .linear import GEN_J, GEN_S, GEN_T, IDENTITY, Mat2

GENERATORS = (("S", GEN_S), ("T", GEN_T), ("J", GEN_J))


@dataclass(frozen=True)
class CosetTable:
    subgroup_test: Callable[[Mat2], bool]
    reps: tuple  # left-coset representatives; reps[0] is the identity
    action: dict = field(compare=False)  # (rep index, generator name) -> rep index

    def index(self) -> int:
        return len(self.reps)

    def coset_of(self, m: Mat2) -> int:
        """Index i with m in reps[i] * subgroup."""
        for i, u in enumerate(self.reps):
            if self.subgroup_test(u.inverse() * m):
                return i
        raise ValueError(f"{m} lies in no tabulated coset")


def build_coset_table(subgroup_test, budget: int, generators=GENERATORS) -> CosetTable:
    """BFS from the identity: left-multiplying representatives by generators
    until every product lands in a known coset."""
    reps = [IDENTITY]
    action = {}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for name, gen in generators:
            v = gen * reps[i]
            for j, u in enumerate(reps):
                if subgroup_test(u.inverse() * v):
                    break
            else:
                reps.append(v)
                j = len(reps) - 1
                if len(reps) > budget:
                    raise ResourceLimitError(
                        f"coset enumeration exceeded budget {budget}"
                    )
                queue.append(j)
            action[(i, name)] = j
    return CosetTable(subgroup_test, tuple(reps), action)
