"""MGM with cost-column transfers: MCS-MGM and GCA-MGM.

When a neighbour's new value raises an agent's cost by ``delta``, the agent
may hand the neighbour the whole column of its side for that value (every
row of its own domain) and zero its copy. The receiver adds the column to
its matching row, so the sum of held costs stays equal to the true global
cost. MCS-MGM transfers when ``delta`` exceeds the neighbour's last
reported gain; GCA-MGM transfers on any increase.
"""

from __future__ import annotations

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import run_local
from .mgm import Mgm


class TransferMgm(Mgm):
    phases = ("values", "transfer", "gain", "move")

    def __init__(self, instance: AdcopInstance, rule: str, initial_transfer: bool = True):
        if rule not in ("mcs", "gca"):
            raise ValueError(f"unknown transfer rule {rule!r}")
        super().__init__(instance)
        self.rule = rule
        self.name = f"{rule}mgm"
        self.initial_transfer = initial_transfer
        self.last_lr: dict[int, dict[int, float]] = {a: {b: 0.0 for b in self.links[a]} for a in self.links}
        self.transfers = 0

    def _should_transfer(self, delta: float, a: int, b: int) -> bool:
        if self.rule == "gca":
            return delta > 0
        return delta > self.last_lr[a][b]

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "values":
            self.send_value(a, net)
        elif phase == "transfer":
            old = self.read_values(a, inbox)
            mine = self.values[a]
            for b, y in self.cache[a].items():
                table = self.tables[a][b]
                if b in old:
                    if old[b] == y:
                        continue
                    delta = float(table[mine, y] - table[mine, old[b]])
                elif self.initial_transfer:
                    # first sight of the neighbour counts as a change from zero cost
                    delta = float(table[mine, y])
                else:
                    continue
                net.ctx(a).charge(2)
                if not self._should_transfer(delta, a, b):
                    continue
                column = table[:, y].copy()
                table[:, y] = 0
                lk = self.links[a][b]
                self.transfers += 1
                net.send(a, b, "TRANSFER", (y, column), reveals=tuple(lk.entry(x, y) for x in range(self.sizes[a])))
        elif phase == "gain":
            for m in inbox:
                if m.kind == "TRANSFER":
                    y, column = m.payload
                    self.tables[a][m.sender][y, :] += column
            self.compute_gain(a, net)
            self.send_gain(a, net)
        else:
            self.read_gains(a, inbox)
            self.last_lr[a].update(self.heard[a])
            if self.wins(a):
                self.values[a] = self.candidate[a]


def _run(instance, rule, cycles, seed, optimal_cost, initial_transfer) -> RunReport:
    algo = TransferMgm(instance, rule, initial_transfer)
    report = run_local(algo, seed, cycles, optimal_cost)
    report.extra["transfers"] = algo.transfers
    report.extra["held_cost"] = algo.held_cost()
    return report


def mcs_mgm(instance: AdcopInstance, cycles: int = 200, seed: int = 0, optimal_cost=None, initial_transfer: bool = True) -> RunReport:
    return _run(instance, "mcs", cycles, seed, optimal_cost, initial_transfer)


def gca_mgm(instance: AdcopInstance, cycles: int = 200, seed: int = 0, optimal_cost=None, initial_transfer: bool = True) -> RunReport:
    return _run(instance, "gca", cycles, seed, optimal_cost, initial_transfer)
