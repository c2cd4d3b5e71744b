from __future__ import annotations

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import LocalSearch, beats, best_value, run_local


class Mgm(LocalSearch):
    """Maximum gain message: only the agent with the largest local reduction among its neighbours moves."""

    name = "mgm"
    phases = ("values", "gain", "move")

    def __init__(self, instance: AdcopInstance):
        super().__init__(instance)
        self.gain = [0.0] * (self.n + 1)
        self.candidate = [0] * (self.n + 1)
        self.heard: dict[int, dict[int, float]] = {a: {} for a in self.links}

    def compute_gain(self, a: int, net: Network) -> None:
        costs = self.local_costs(a, net)
        v = best_value(costs)
        self.candidate[a] = v
        self.gain[a] = max(0.0, float(costs[self.values[a]] - costs[v]))

    def send_gain(self, a: int, net: Network) -> None:
        for b in self.links[a]:
            net.send(a, b, "LR", self.gain[a])

    def read_gains(self, a: int, inbox: list[Message]) -> None:
        for m in inbox:
            if m.kind == "LR":
                self.heard[a][m.sender] = m.payload

    def wins(self, a: int) -> bool:
        if self.gain[a] <= 0:
            return False
        return all(beats(self.gain[a], a, g, b) for b, g in self.heard[a].items())

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "values":
            self.send_value(a, net)
        elif phase == "gain":
            self.read_values(a, inbox)
            self.compute_gain(a, net)
            self.send_gain(a, net)
        else:
            self.read_gains(a, inbox)
            if self.wins(a):
                self.values[a] = self.candidate[a]


def mgm(instance: AdcopInstance, cycles: int = 200, seed: int = 0, optimal_cost=None) -> RunReport:
    return run_local(Mgm(instance), seed, cycles, optimal_cost)
