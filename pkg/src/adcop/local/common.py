"""Shared machinery for the synchronous local-search algorithms.

Each algorithm is a :class:`~adcop.simnet.SyncAlgorithm` driven by
``run_synchronous``. Agents only ever read their own sides of the
constraints (held here as mutable copies, so that MCS/GCA can move cost
columns between neighbours) plus whatever arrives in their inbox.
"""

from __future__ import annotations

import logging
from typing import Any, Optional

import numpy as np

from ..complete.layout import Link, adcop_layout
from ..metrics import PrivacyLedger, RunReport, convergence_cycle, finish_report
from ..model import AdcopInstance
from ..simnet import Message, Network, ScheduleConfig, run_synchronous

log = logging.getLogger(__name__)


class LocalSearch:
    """Agent state for every agent of a binary, one-variable-per-agent ADCOP."""

    name = "local"
    phases: tuple[str, ...] = ()

    def __init__(self, instance: AdcopInstance):
        layout = adcop_layout(instance)
        self.instance = instance
        self.n = layout.n
        self.sizes = layout.sizes
        self.links: dict[int, dict[int, Link]] = {a: {lk.other: lk for lk in layout.links[a]} for a in range(1, self.n + 1)}
        # agent-local copies of its own sides, oriented [own value, neighbour value]
        self.tables: dict[int, dict[int, np.ndarray]] = {
            a: {b: np.array(lk.table, copy=True) for b, lk in self.links[a].items()} for a in self.links
        }
        self.unary: dict[int, Optional[np.ndarray]] = {
            a: np.sum(layout.unary[a], axis=0) if layout.unary[a] else None for a in self.links
        }
        self.values = [0] * (self.n + 1)
        self.cache: dict[int, dict[int, int]] = {a: {} for a in self.links}
        self.ledger = PrivacyLedger(instance)
        self._last: Optional[tuple[int, ...]] = None
        self._pairs = [
            (instance.owners[c.scope[0]], instance.owners[c.scope[1]], c.sides[0] + c.sides[1])
            for c in instance.constraints
            if c.arity == 2
        ]

    # -- SyncAlgorithm -------------------------------------------------------

    def setup(self, net: Network) -> None:
        for a in self.links:
            self.values[a] = int(net.ctx(a).rng.integers(self.sizes[a]))

    def assignment(self) -> tuple[int, ...]:
        return tuple(self.values[1:])

    def quiescent(self) -> bool:
        """No value moved this cycle and no further cycle could move one."""
        cur = self.assignment()
        changed = cur != self._last
        self._last = cur
        return not changed and self.stable()

    def stable(self) -> bool:
        return not any(self._has_improvement(a) for a in self.links)

    # -- helpers -------------------------------------------------------------

    def send_value(self, a: int, net: Network) -> None:
        for b in self.links[a]:
            net.send(a, b, "VALUE", self.values[a])

    def read_values(self, a: int, inbox: list[Message]) -> dict[int, int]:
        """Refresh the neighbour cache; returns the previous cache."""
        old = dict(self.cache[a])
        for m in inbox:
            if m.kind == "VALUE":
                self.cache[a][m.sender] = m.payload
        return old

    def local_costs(self, a: int, net: Optional[Network] = None, view: Optional[dict[int, int]] = None) -> np.ndarray:
        """Cost of each own value against the neighbour values in ``view``."""
        view = self.cache[a] if view is None else view
        costs = np.zeros(self.sizes[a], dtype=np.float64)
        for b, table in self.tables[a].items():
            costs += table[:, view[b]]
        checks = len(self.tables[a])
        if self.unary[a] is not None:
            costs += self.unary[a]
            checks += 1
        if net is not None and checks:
            net.ctx(a).charge(self.sizes[a] * checks)
        return costs

    def true_view(self, a: int) -> dict[int, int]:
        return {b: self.values[b] for b in self.links[a]}

    def _has_improvement(self, a: int) -> bool:
        if not self.tables[a] and self.unary[a] is None:
            return False
        costs = self.local_costs(a, view=self.true_view(a))
        return costs.min() < costs[self.values[a]]

    def global_cost(self, assignment: tuple[int, ...]):
        total = 0
        for a, b, table in self._pairs:
            total += table[assignment[a - 1], assignment[b - 1]]
        for a, u in self.unary.items():
            if u is not None:
                total += u[assignment[a - 1]]
        return total.item() if hasattr(total, "item") else total

    def held_cost(self) -> Any:
        """Sum of every agent's held (possibly transferred) sides at the current assignment."""
        total = 0.0
        for a, row in self.tables.items():
            for b, table in row.items():
                total += table[self.values[a], self.values[b]]
            if self.unary[a] is not None:
                total += self.unary[a][self.values[a]]
        return total


def best_value(costs: np.ndarray) -> int:
    """Lowest-index minimiser."""
    return int(np.argmin(costs))


def beats(gain, me: int, other_gain, other: int) -> bool:
    """MGM winner rule: strictly larger gain, lower index on ties."""
    return gain > other_gain or (gain == other_gain and me < other)


def run_local(algo: LocalSearch, seed: int, cycles: int, optimal_cost=None) -> RunReport:
    if cycles < 0:
        raise ValueError("cycles must be non-negative")
    cfg = ScheduleConfig(mode="synchronous", seed=seed, max_cycles=cycles)
    net = Network(range(1, algo.n + 1), cfg, algo.ledger)
    history: list[tuple[int, ...]] = []

    def evaluate(assignment):
        history.append(assignment)
        return algo.global_cost(assignment)

    trace = run_synchronous(algo, net, evaluate)
    last_change = 0
    for t in range(1, len(history)):
        if history[t] != history[t - 1]:
            last_change = t
    final = history[-1]
    report = finish_report(
        algo.name,
        net,
        final,
        algo.global_cost(final),
        algo.ledger,
        cost_trace=list(trace.costs),
        optimal_cost=optimal_cost,
        cycles_to_converge=convergence_cycle(trace.costs),
    )
    report.extra["last_change"] = last_change
    report.extra["assignments"] = history
    report.extra["quiescent_at"] = trace.converged_at
    log.debug("%s seed=%d cost=%s cycles=%d", algo.name, seed, report.cost, trace.cycles_run)
    return report
