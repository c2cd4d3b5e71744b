"""Run reports, entropy-based privacy accounting and quality traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .model import AdcopInstance

Entry = tuple[int, int, tuple[int, ...]]
"""Private cost entry: ``(constraint index, side agent, value combination in scope order)``."""


class ForeignEntryError(ValueError):
    """An agent was recorded as revealing an entry it does not own."""


class PrivacyLedger:
    """Which private side entries each agent can infer about each other agent.

    All entries carry the same prior entropy, ``log2(|cost alphabet|)`` bits,
    so percentages reduce to entry counts.
    """

    def __init__(self, instance: AdcopInstance):
        self.instance = instance
        self.bits_per_entry = math.log2(len(instance.cost_alphabet)) if len(instance.cost_alphabet) > 1 else 0.0
        self.own_entries: dict[int, int] = {i: 0 for i in instance.agents}
        self.visible: dict[int, int] = {i: 0 for i in instance.agents}
        for c in instance.constraints:
            agents = [instance.owners[v] for v in c.scope]
            for pos, agent in enumerate(agents):
                size = c.sides[pos].size
                self.own_entries[agent] += size
                for other in agents:
                    if other != agent:
                        self.visible[other] += size
        self.revealed: dict[tuple[int, int], set[Entry]] = {}
        self.revealed_any: dict[int, set[Entry]] = {i: set() for i in instance.agents}
        self.learned: dict[int, set[Entry]] = {i: set() for i in instance.agents}
        # learned entries on constraints the learner itself belongs to
        self.learned_visible: dict[int, set[Entry]] = {i: set() for i in instance.agents}

    def initial_bits(self, agent: int) -> float:
        return self.own_entries[agent] * self.bits_per_entry

    def _check(self, owner: int, entry: Entry) -> None:
        cidx, side_agent, cell = entry
        if side_agent != owner:
            raise ForeignEntryError(f"agent {owner} cannot reveal agent {side_agent}'s entry")
        try:
            c = self.instance.constraints[cidx]
        except IndexError:
            raise ForeignEntryError(f"no constraint {cidx}") from None
        if owner not in (self.instance.owners[v] for v in c.scope):
            raise ForeignEntryError(f"agent {owner} is not in constraint {cidx}")
        if len(cell) != c.arity or any(not 0 <= x < k for x, k in zip(cell, c.sides[0].shape)):
            raise ForeignEntryError(f"cell {cell} outside constraint {cidx}")

    def record_many(self, owner: int, learner: int, entries: Iterable[Entry]) -> None:
        bucket = self.revealed.setdefault((owner, learner), set())
        for entry in entries:
            self._check(owner, entry)
            bucket.add(entry)
            self.revealed_any[owner].add(entry)
            self.learned[learner].add(entry)
            if learner in self._scope_agents(entry[0]):
                self.learned_visible[learner].add(entry)

    def _scope_agents(self, cidx: int) -> tuple[int, ...]:
        return tuple(self.instance.owners[v] for v in self.instance.constraints[cidx].scope)

    def disclose_all(self) -> None:
        """Every agent hands every side it holds to its co-constrained agents."""
        inst = self.instance
        for cidx, c in enumerate(inst.constraints):
            agents = [inst.owners[v] for v in c.scope]
            for pos, agent in enumerate(agents):
                cells = [(cidx, agent, tuple(int(x) for x in idx)) for idx in _cells(c.sides[pos].shape)]
                for other in agents:
                    if other != agent:
                        self.record_many(agent, other, cells)

    def loss(self, agent: int) -> float:
        if self.own_entries[agent] == 0 or self.bits_per_entry == 0:
            return 0.0
        return 100.0 * len(self.revealed_any[agent]) / self.own_entries[agent]

    def gain(self, agent: int) -> float:
        if self.visible[agent] == 0 or self.bits_per_entry == 0:
            return 0.0
        return 100.0 * len(self.learned_visible[agent]) / self.visible[agent]


def _cells(shape):
    import itertools

    return itertools.product(*(range(k) for k in shape))


def record_revelation(ledger: PrivacyLedger, from_agent: int, to_agent: int, entries: Iterable[Entry]) -> None:
    ledger.record_many(from_agent, to_agent, entries)


def average_privacy_loss(ledger: PrivacyLedger) -> float:
    """Mean over agents of the percentage of own entry bits revealed to anyone."""
    agents = list(ledger.own_entries)
    if not agents:
        return 0.0
    return sum(ledger.loss(a) for a in agents) / len(agents)


def max_privacy_gain(ledger: PrivacyLedger) -> float:
    """Largest percentage of neighbours' entry bits that one agent has learned."""
    return max((ledger.gain(a) for a in ledger.learned), default=0.0)


@dataclass
class RunReport:
    algorithm: str
    assignment: Optional[tuple[int, ...]]
    cost: Any
    nclo_per_agent: dict[int, int] = field(default_factory=dict)
    messages: dict[str, int] = field(default_factory=dict)
    cost_trace: list = field(default_factory=list)
    avg_privacy_loss: float = 0.0
    max_privacy_gain: float = 0.0
    privacy_loss_per_agent: dict[int, float] = field(default_factory=dict)
    privacy_gain_per_agent: dict[int, float] = field(default_factory=dict)
    optimal_cost: Any = None
    cycles_to_converge: Optional[int] = None
    status: str = "ok"
    halted: bool = False
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def nclo(self) -> int:
        return max(self.nclo_per_agent.values(), default=0)

    @property
    def total_messages(self) -> int:
        return sum(self.messages.values())

    @property
    def distance_from_optimum(self):
        if self.optimal_cost is None or self.cost is None:
            return None
        return self.cost - self.optimal_cost


def finish_report(algorithm: str, net, assignment, cost, ledger: Optional[PrivacyLedger] = None, **kwargs) -> RunReport:
    if hasattr(cost, "item"):
        cost = cost.item()
    report = RunReport(
        algorithm=algorithm,
        assignment=tuple(assignment) if assignment is not None else None,
        cost=cost,
        nclo_per_agent=net.counters(),
        messages=dict(net.sent),
        halted=getattr(net, "halted", False),
        **kwargs,
    )
    if ledger is not None:
        report.avg_privacy_loss = average_privacy_loss(ledger)
        report.max_privacy_gain = max_privacy_gain(ledger)
        report.privacy_loss_per_agent = {a: ledger.loss(a) for a in ledger.own_entries}
        report.privacy_gain_per_agent = {a: ledger.gain(a) for a in ledger.learned}
    return report


def anytime_trace(report: RunReport) -> list[tuple[int, Any]]:
    """``(cycle, global cost)`` pairs, cycle 0 being the initial assignment."""
    if not report.cost_trace:
        raise ValueError(f"{report.algorithm} run carries no per-cycle trace")
    return list(enumerate(report.cost_trace))


def convergence_cycle(trace: list) -> int:
    """First cycle after which the cost never changes again."""
    last = len(trace) - 1
    while last > 0 and trace[last - 1] == trace[-1]:
        last -= 1
    return last


def privacy_capped_run(instance: AdcopInstance, algorithm: str, threshold: float, optimum=None, **kwargs):
    """Run a complete solver, freezing it once some agent's gain exceeds ``threshold``.

    Returns ``(best cost found so far, distance from optimum)``; the cost is
    ``inf`` when no full assignment was bounded before the halt.
    """
    if not 0 <= threshold <= 100:
        raise ValueError("threshold must lie in [0, 100]")
    from .complete import atwb, sync_abb

    solvers = {"syncabb": sync_abb, "atwb": atwb}
    if algorithm not in solvers:
        raise ValueError(f"privacy capping supports {sorted(solvers)}, not {algorithm!r}")
    stop = lambda net: max_privacy_gain(net.ledger) > threshold  # noqa: E731
    report = solvers[algorithm](instance, stop=stop, **kwargs)
    best = report.cost if report.cost is not None else math.inf
    distance = None if optimum is None else best - optimum
    return best, distance
