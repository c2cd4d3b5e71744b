"""Min-sum message passing on the factor graph of the aggregated costs.

One function node per constraint, hosted by the lower-indexed of its two
agents; its table is the sum of both sides, so the other agent hands its
side to the host at start-up. Messages start at zero and are normalised by
subtracting their minimum before sending.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import LocalSearch, best_value, run_local


@dataclass
class Factor:
    index: int
    host: int
    other: int
    table: np.ndarray
    """Aggregated costs, ``[host value, other value]``."""


def normalise(msg: np.ndarray) -> np.ndarray:
    return msg - msg.min() if msg.size else msg


class MaxSum(LocalSearch):
    name = "maxsum"
    phases = ("variables", "functions", "select")

    def __init__(self, instance: AdcopInstance):
        super().__init__(instance)
        self.factors: list[Factor] = []
        self.var_factors: dict[int, list[int]] = {a: [] for a in self.links}
        for a in self.links:
            for b, lk in sorted(self.links[a].items()):
                if a < b:
                    table = lk.table + self.links[b][a].table.T
                    f = Factor(len(self.factors), a, b, table)
                    self.var_factors[a].append(f.index)
                    self.var_factors[b].append(f.index)
                    self.factors.append(f)
        # q[(var, factor)] variable-to-function, r[(factor, var)] function-to-variable
        self.q: dict[tuple[int, int], np.ndarray] = {}
        self.r: dict[tuple[int, int], np.ndarray] = {}
        for f in self.factors:
            for v in (f.host, f.other):
                self.q[v, f.index] = np.zeros(self.sizes[v])
                self.r[f.index, v] = np.zeros(self.sizes[v])
        self._changed = True

    def setup(self, net: Network) -> None:
        super().setup(net)
        for f in self.factors:
            lk = self.links[f.other][f.host]
            cells = tuple(lk.entry(u, w) for u in range(self.sizes[f.other]) for w in range(self.sizes[f.host]))
            net.send(f.other, f.host, "SIDE", None, reveals=cells)

    def _deliver(self, a: int, key, msg: np.ndarray, to: int, kind: str, store: dict, net: Network) -> None:
        old = store[key]
        if not np.array_equal(old, msg):
            self._changed = True
        store[key] = msg
        if to != a:
            net.send(a, to, kind, (key, msg))

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "variables":
            if a == 1:
                self._changed = False
            incoming = [self.r[fi, a] for fi in self.var_factors[a]]
            total = self._belief(a, incoming)
            for fi, r in zip(self.var_factors[a], incoming):
                msg = normalise(total - r)
                self._deliver(a, (a, fi), msg, self.factors[fi].host, "Q", self.q, net)
        elif phase == "functions":
            for fi in self.var_factors[a]:
                f = self.factors[fi]
                if f.host != a:
                    continue
                t = f.table
                to_host = normalise((t + self.q[f.other, fi][None, :]).min(axis=1))
                to_other = normalise((t + self.q[f.host, fi][:, None]).min(axis=0))
                net.ctx(a).charge(2 * t.size)
                self._deliver(a, (fi, f.host), to_host, f.host, "R", self.r, net)
                self._deliver(a, (fi, f.other), to_other, f.other, "R", self.r, net)
        else:
            incoming = [self.r[fi, a] for fi in self.var_factors[a]]
            if incoming or self.unary[a] is not None:
                self.values[a] = best_value(self._belief(a, incoming))

    def _belief(self, a: int, incoming: list[np.ndarray]) -> np.ndarray:
        """Own unary costs plus the incoming function messages."""
        total = np.zeros(self.sizes[a]) if self.unary[a] is None else self.unary[a].astype(np.float64)
        for r in incoming:
            total = total + r
        return total

    def stable(self) -> bool:
        return not self._changed


def max_sum(instance: AdcopInstance, cycles: int = 200, seed: int = 0, optimal_cost=None) -> RunReport:
    return run_local(MaxSum(instance), seed, cycles, optimal_cost)
