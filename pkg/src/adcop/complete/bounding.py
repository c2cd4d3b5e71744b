"""Asynchronous forward bounding (AFB) and its two-way ADCOP variant (ATWB).

The CPA moves forward one agent at a time, as in SyncBB. After every
assignment the assigner also sends BOUND_CPA copies and collects
ESTIMATE replies, reassigning as soon as its bound reaches B.

In ATWB the copies also go backward. A backward receiver already has a
value on the CPA, so it replies with the exact cost of its own side
against the later assignments on the CPA plus an ``h2`` lower bound for
the agents still unassigned. The last agent declares a new solution only
once every backward estimate for its CPA has arrived.

Staleness: each CPA carries a stamp, the tuple of assignment counters of
the agents on it. Messages whose stamp is older than the receiver's view
are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from ..metrics import PrivacyLedger, RunReport, finish_report
from ..model import AdcopInstance, Dcop
from ..simnet import Message, Network, ScheduleConfig, run_asynchronous
from .layout import Layout, adcop_layout, dcop_layout

INF = math.inf


@dataclass(frozen=True, slots=True)
class BoundCpa:
    values: tuple[int, ...]
    cost: Any
    stamp: tuple[int, ...]


def _older(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """Whether stamp ``a`` is older than ``b`` on their common prefix."""
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def build_h2(layout: Layout, i: int) -> np.ndarray:
    """``h2[v, j]``: sum over neighbours ``k > j`` (``k != i``) of ``min_d side_i(v, d)``.

    Column ``j`` runs over ``0..n``; ``h2[:, n]`` is all zero.
    """
    n = layout.n
    k = layout.sizes[i]
    dtype = np.result_type(np.int64, *(lk.table.dtype for lk in layout.links[i]))
    per_neighbor = np.zeros((k, n + 2), dtype=dtype)
    for lk in layout.links[i]:
        per_neighbor[:, lk.other] += lk.table.min(axis=1)
    # suffix sums: column j holds the sum over columns > j
    suffix = np.cumsum(per_neighbor[:, ::-1], axis=1)[:, ::-1]
    h2 = np.zeros((k, n + 1), dtype=dtype)
    h2[:, : n + 1] = suffix[:, 1 : n + 2]
    return h2


class _Run:
    def __init__(self, layout: Layout, two_way: bool, ledger: Optional[PrivacyLedger]):
        self.layout = layout
        self.two_way = two_way
        self.ledger = ledger
        self.best: Optional[tuple[int, ...]] = None
        self.best_cost = INF
        self.bounds: list = []


class BoundingAgent:
    def __init__(self, i: int, run: _Run):
        self.i = i
        self.run = run
        self.n = run.layout.n
        self.k = run.layout.sizes[i]
        self.links = run.layout.links[i]
        self.by_other = {lk.other: lk for lk in self.links}
        self.earlier = run.layout.earlier(i)
        self.unary = run.layout.unary[i]
        self.two_way = run.two_way
        self.h2 = build_h2(run.layout, i) if self.two_way else None
        self.B = INF
        self.counter = 0
        self.view: tuple[int, ...] = ()
        self.prefix: Optional[BoundCpa] = None
        self.cpa: Optional[BoundCpa] = None
        self.next_value = 0
        self.estimates: dict[int, Any] = {}
        self.backward_pending = 0
        self.done = False

    def start(self, net: Network) -> None:
        if self.two_way:
            # precomputing h2 reads every own table entry once
            cells = sum(lk.table.size for lk in self.links)
            if cells:
                net.ctx(self.i).charge(cells)
        if self.i == 1:
            self.prefix = BoundCpa((), 0, ())
            self._assign(net)

    # -- assigning -----------------------------------------------------------

    def _own_cost(self, net: Network, v: int, values) -> Any:
        total = 0
        checks = 0
        for lk in self.earlier:
            total += lk.table[v, values[lk.other - 1]]
            checks += 1
        for table in self.unary:
            total += table[v]
            checks += 1
        if checks:
            net.ctx(self.i).charge(checks)
        return total

    def _own_bound(self, v: int) -> Any:
        return self.h2[v, self.i] if self.two_way else 0

    def _assign(self, net: Network) -> None:
        prefix = self.prefix
        self.cpa = None
        while self.next_value < self.k:
            v = self.next_value
            self.next_value += 1
            cost = prefix.cost + self._own_cost(net, v, prefix.values)
            if cost + self._own_bound(v) >= self.B:
                continue
            self.counter += 1
            stamp = prefix.stamp + (self.counter,)
            self.view = stamp
            self.cpa = BoundCpa(prefix.values + (v,), cost, stamp)
            self.estimates = {}
            if self.i < self.n:
                net.send(self.i, self.i + 1, "CPA_MSG", self.cpa)
                for other in range(self.i + 1, self.n + 1):
                    net.send(self.i, other, "BOUND_CPA", self.cpa)
            if self.two_way:
                for other in range(1, self.i):
                    net.send(self.i, other, "BOUND_CPA", self.cpa)
                self.backward_pending = self.i - 1
            if self.i == self.n and (not self.two_way or self.backward_pending == 0):
                self._declare(net, self.cpa.values, cost)
                continue
            return
        if self.i == 1:
            self.done = True
            net.broadcast(self.i, "TERMINATE")
            net.terminate()
        else:
            net.send(self.i, self.i - 1, "CPA_MSG", prefix)

    def _declare(self, net: Network, values, cost) -> None:
        self.B = cost
        self.run.best, self.run.best_cost = values, cost
        self.run.bounds.append(cost)
        net.broadcast(self.i, "NEW_SOLUTION", (values, cost))

    def _bound(self) -> Any:
        total = self.cpa.cost + sum(self.estimates.values())
        if self.two_way:
            total += self.h2[self.cpa.values[-1], self.i]
        return total

    # -- estimating ----------------------------------------------------------

    def _forward_estimate(self, net: Network, cpa: BoundCpa) -> Any:
        j = len(cpa.values)
        assigned = [lk for lk in self.links if lk.other <= j]
        if self.two_way:
            rest = self.h2[:, j].copy()
        else:
            # symmetric: constraints with unassigned agents before me are mine to bound
            rest = np.zeros(self.k, dtype=np.result_type(np.int64, *(lk.table.dtype for lk in self.links)))
            for lk in self.links:
                if j < lk.other < self.i:
                    rest += lk.table.min(axis=1)
        best = INF
        for u in range(self.k):
            total = rest[u]
            for lk in assigned:
                total += lk.table[u, cpa.values[lk.other - 1]]
            for table in self.unary:
                total += table[u]
            if total < best:
                best = total
        checks = self.k * (len(assigned) + len(self.unary))
        if checks:
            net.ctx(self.i).charge(checks)
        return best.item() if hasattr(best, "item") else best

    def _backward_estimate(self, net: Network, cpa: BoundCpa) -> tuple[Any, tuple]:
        j = len(cpa.values)
        mine = cpa.values[self.i - 1]
        total = self.h2[mine, j]
        checks = 0
        for lk in self.links:
            if self.i < lk.other <= j:
                total += lk.table[mine, cpa.values[lk.other - 1]]
                checks += 1
        if checks:
            net.ctx(self.i).charge(checks)
        reveals = ()
        lk = self.by_other.get(j)
        if lk is not None:
            reveals = (lk.entry(mine, cpa.values[j - 1]),)
        return total.item() if hasattr(total, "item") else total, reveals

    # -- dispatch ------------------------------------------------------------

    def handle(self, msg: Message, net: Network) -> None:
        if self.done:
            if msg.kind == "NEW_SOLUTION" and msg.payload[1] < self.B:
                self.B = msg.payload[1]
            return
        kind = msg.kind
        if kind == "CPA_MSG":
            cpa: BoundCpa = msg.payload
            if len(cpa.values) == self.i - 1:
                if _older(cpa.stamp, self.view):
                    return
                self.view = cpa.stamp
                self.prefix = cpa
                self.next_value = 0
                self._assign(net)
            elif self.cpa is not None and cpa.stamp == self.cpa.stamp:
                # backtrack from the next agent: its subtree under my value is done
                self._assign(net)
        elif kind == "BOUND_CPA":
            cpa = msg.payload
            if len(cpa.values) < self.i:
                if _older(cpa.stamp, self.view):
                    return
                if _older(self.view, cpa.stamp) or len(cpa.stamp) > len(self.view):
                    self.view = cpa.stamp
                est = self._forward_estimate(net, cpa)
                net.send(self.i, msg.sender, "ESTIMATE", (cpa.stamp, est))
            else:
                if self.cpa is None or cpa.stamp[self.i - 1] != self.counter:
                    return
                est, reveals = self._backward_estimate(net, cpa)
                net.send(self.i, msg.sender, "ESTIMATE", (cpa.stamp, est), reveals=reveals)
        elif kind == "ESTIMATE":
            stamp, est = msg.payload
            if self.cpa is None or stamp != self.cpa.stamp:
                return
            first = msg.sender not in self.estimates
            self.estimates[msg.sender] = est
            if first and msg.sender < self.i:
                self.backward_pending -= 1
            if self._bound() >= self.B:
                self._assign(net)
            elif self.i == self.n and self.backward_pending == 0:
                self._declare(net, self.cpa.values, self._bound())
                self._assign(net)
        elif kind == "NEW_SOLUTION":
            if msg.payload[1] < self.B:
                self.B = msg.payload[1]
        elif kind == "TERMINATE":
            self.done = True
        else:
            raise ValueError(f"unexpected message {kind}")


def _solve(layout: Layout, two_way: bool, algorithm: str, seed: int, policy: str, ledger, stop, trace=False) -> RunReport:
    run = _Run(layout, two_way, ledger)
    cfg = ScheduleConfig(mode="asynchronous", seed=seed, message_order_policy=policy, trace=trace)
    net = Network(range(1, layout.n + 1), cfg, ledger)
    if layout.n == 0:
        return finish_report(algorithm, net, (), 0, ledger)
    agents = {i: BoundingAgent(i, run) for i in range(1, layout.n + 1)}
    run_asynchronous(agents, net, stop)
    cost = run.best_cost if run.best is not None else None
    report = finish_report(algorithm, net, run.best, cost, ledger)
    report.extra["bounds"] = list(run.bounds)
    if net.trace is not None:
        report.extra["trace"] = net.trace
    return report


def afb(problem: Dcop, seed: int = 0, policy: str = "fifo", trace: bool = False) -> RunReport:
    """AFB on a symmetric DCOP, one simulated agent per variable."""
    if not isinstance(problem, Dcop):
        raise TypeError("afb expects a symmetric Dcop")
    return _solve(dcop_layout(problem), False, "afb", seed, policy, None, None, trace)


def atwb(
    instance: AdcopInstance,
    seed: int = 0,
    policy: str = "fifo",
    trace: bool = False,
    stop: Callable[[Network], bool] | None = None,
) -> RunReport:
    ledger = PrivacyLedger(instance)
    return _solve(adcop_layout(instance), True, "atwb", seed, policy, ledger, stop, trace)
