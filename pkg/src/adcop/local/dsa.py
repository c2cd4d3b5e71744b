from __future__ import annotations

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import LocalSearch, best_value, run_local


class Dsa(LocalSearch):
    """DSA-B: move to the best own-side value on strict improvement, with probability p."""

    name = "dsa"
    phases = ("values", "decide")

    def __init__(self, instance: AdcopInstance, p: float = 0.6):
        if not 0 <= p <= 1:
            raise ValueError("p must lie in [0, 1]")
        super().__init__(instance)
        self.p = p

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "values":
            self.send_value(a, net)
            return
        self.read_values(a, inbox)
        costs = self.local_costs(a, net)
        v = best_value(costs)
        if costs[v] < costs[self.values[a]] and net.ctx(a).rng.random() < self.p:
            self.values[a] = v

    def _has_improvement(self, a: int) -> bool:
        return self.p > 0 and super()._has_improvement(a)


def dsa(instance: AdcopInstance, p: float = 0.6, cycles: int = 200, seed: int = 0, optimal_cost=None) -> RunReport:
    return run_local(Dsa(instance, p), seed, cycles, optimal_cost)
