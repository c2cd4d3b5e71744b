"""Position-ordered cost lookups shared by the sequential complete solvers.

Search position ``i`` (1-based) is agent ``i`` of a binary ADCOP, or
variable ``i - 1`` of a symmetric DCOP searched one variable per agent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import AdcopInstance, Dcop, require_binary_single


@dataclass
class Link:
    other: int
    table: np.ndarray
    """Oriented ``[value at this position, value at other]``."""
    cidx: int
    side_agent: int
    mine_first: bool

    def entry(self, mine: int, theirs: int):
        cell = (mine, theirs) if self.mine_first else (theirs, mine)
        return (self.cidx, self.side_agent, cell)


@dataclass
class Layout:
    n: int
    sizes: list[int]
    links: list[list[Link]] = field(default_factory=list)
    unary: list[list[np.ndarray]] = field(default_factory=list)

    def earlier(self, i: int) -> list[Link]:
        return [lk for lk in self.links[i] if lk.other < i]

    def later(self, i: int) -> list[Link]:
        return [lk for lk in self.links[i] if lk.other > i]

    def link(self, i: int, other: int) -> Link | None:
        for lk in self.links[i]:
            if lk.other == other:
                return lk
        return None


def adcop_layout(instance: AdcopInstance) -> Layout:
    """Agent ``i``'s own sides, keyed by the other agent."""
    require_binary_single(instance)
    n = instance.n_agents
    layout = Layout(n, [0] + list(instance.domain_sizes), [[] for _ in range(n + 1)], [[] for _ in range(n + 1)])
    for cidx, c in enumerate(instance.constraints):
        if c.arity == 1:
            layout.unary[instance.owners[c.scope[0]]].append(c.sides[0])
            continue
        a, b = (instance.owners[v] for v in c.scope)
        layout.links[a].append(Link(b, c.side_view(0), cidx, a, True))
        layout.links[b].append(Link(a, c.side_view(1), cidx, b, False))
    for lst in layout.links:
        lst.sort(key=lambda lk: lk.other)
    return layout


def dcop_layout(instance: Dcop) -> Layout:
    """Shared tables seen from both endpoints; ``side_agent`` is unused (0)."""
    n = instance.n_vars
    layout = Layout(n, [0] + list(instance.domain_sizes), [[] for _ in range(n + 1)], [[] for _ in range(n + 1)])
    for cidx, c in enumerate(instance.constraints):
        if c.arity == 1:
            layout.unary[c.scope[0] + 1].append(c.table)
        elif c.arity == 2:
            u, w = c.scope[0] + 1, c.scope[1] + 1
            layout.links[u].append(Link(w, c.table, cidx, 0, True))
            layout.links[w].append(Link(u, c.table.T, cidx, 0, False))
        else:
            raise ValueError("sequential solvers handle unary and binary constraints only")
    for lst in layout.links:
        lst.sort(key=lambda lk: lk.other)
    return layout
