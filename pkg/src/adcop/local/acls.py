"""Asymmetric coordinated local search.

An agent with an improving value (judged on its own sides) draws a
proposal with probability proportional to the gain, announces it, and
each neighbour answers with two entries of its own side: the cost against
the current value and against the proposal. The proposal is taken, with
probability ``p``, when

    own change + C * sum of neighbour changes < 0.
"""

from __future__ import annotations

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import LocalSearch, run_local


class Acls(LocalSearch):
    name = "acls"
    phases = ("values", "propose", "impact", "decide")

    def __init__(self, instance: AdcopInstance, p: float = 0.5, C: float = 1.0):
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if C < 0:
            raise ValueError("C must be non-negative")
        super().__init__(instance)
        self.p = p
        self.C = C
        self.proposal: dict[int, int | None] = {a: None for a in self.links}
        self.own_delta: dict[int, float] = {a: 0.0 for a in self.links}

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "values":
            self.proposal[a] = None
            self.send_value(a, net)
        elif phase == "propose":
            self.read_values(a, inbox)
            costs = self.local_costs(a, net)
            gains = costs[self.values[a]] - costs
            gains[gains < 0] = 0
            total = gains.sum()
            if total <= 0:
                return
            pv = int(net.ctx(a).rng.choice(len(gains), p=gains / total))
            self.proposal[a] = pv
            self.own_delta[a] = float(costs[pv] - costs[self.values[a]])
            for b in self.links[a]:
                net.send(a, b, "PROPOSAL", pv)
        elif phase == "impact":
            mine = self.values[a]
            table = self.tables[a]
            for m in inbox:
                if m.kind != "PROPOSAL":
                    continue
                b, pv = m.sender, m.payload
                now, then = self.cache[a][b], pv
                lk = self.links[a][b]
                net.ctx(a).charge(2)
                net.send(
                    a,
                    b,
                    "IMPACT",
                    (float(table[b][mine, now]), float(table[b][mine, then])),
                    reveals=(lk.entry(mine, now), lk.entry(mine, then)),
                )
        else:
            pv = self.proposal[a]
            if pv is None:
                return
            impact = sum(after - before for before, after in (m.payload for m in inbox if m.kind == "IMPACT"))
            delta = self.own_delta[a] + self.C * impact
            if delta < 0 and net.ctx(a).rng.random() < self.p:
                self.values[a] = pv


def acls(instance: AdcopInstance, p: float = 0.5, C: float = 1.0, cycles: int = 200, seed: int = 0, optimal_cost=None) -> RunReport:
    return run_local(Acls(instance, p, C), seed, cycles, optimal_cost)
