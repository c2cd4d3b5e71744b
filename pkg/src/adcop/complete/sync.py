"""Synchronous branch and bound over a single CPA token.

One agent class covers four protocols:

``sym``       SyncBB on a symmetric DCOP, one search position per variable.
``onesided``  SyncBB run on an ADCOP counting only each agent's side
              against its predecessors. Unsound; kept as a demonstration.
``2ph``       SyncABB-2ph: one-sided search, then a back-check sweep from
              the last agent down to the first on every full assignment.
``1ph``       SyncABB: every new assignment by agent j is back-checked by
              j-1, ..., 1 before the CPA moves to j+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

from ..metrics import PrivacyLedger, RunReport, finish_report
from ..model import AdcopInstance, Dcop, evaluate_global
from ..simnet import Message, Network, ScheduleConfig, run_asynchronous
from .layout import Layout, adcop_layout, dcop_layout

INF = math.inf


@dataclass(frozen=True, slots=True)
class Cpa:
    values: tuple[int, ...]
    cost: Any
    token: int
    pos: int
    last_id: int = 0


class CpaTrail:
    """Which private entries were summed into each CPA's cost, in order.

    Pure instrumentation for the privacy model: a token is created per
    assignment event and forks from its parent at the parent's position
    at that time, so the entries added between two observations of a
    CPA can be recovered whenever the later one extends the earlier.
    """

    def __init__(self) -> None:
        self.parent: list[Optional[int]] = [None]
        self.fork: list[int] = [0]
        self.trail: list[list] = [[]]

    def child(self, parent: int, pos: int) -> int:
        self.parent.append(parent)
        self.fork.append(pos)
        self.trail.append([])
        return len(self.trail) - 1

    def add(self, token: int, entries) -> int:
        self.trail[token].extend(entries)
        return len(self.trail[token])

    def added_between(self, seen: tuple[int, int], token: int, pos: int) -> Optional[list]:
        seen_token, seen_pos = seen
        segments = []
        t: Optional[int] = token
        p = pos
        while t is not None:
            if t == seen_token:
                if seen_pos > p:
                    return None
                segments.append(self.trail[t][seen_pos:p])
                return [e for seg in reversed(segments) for e in seg]
            segments.append(self.trail[t][:p])
            p = self.fork[t]
            t = self.parent[t]
        return None


class _Run:
    def __init__(self, layout: Layout, mode: str, ledger: Optional[PrivacyLedger]):
        self.layout = layout
        self.mode = mode
        self.ledger = ledger
        self.trail = CpaTrail()
        self.best: Optional[tuple[int, ...]] = None
        self.best_cost = INF
        self.bounds: list = []
        self.prefixes_tried: set = set()
        self.repeated_prefix = False

    def declare(self, values: tuple[int, ...], cost) -> None:
        self.best, self.best_cost = values, cost
        self.bounds.append(cost)


class SyncAgent:
    def __init__(self, i: int, run: _Run):
        self.i = i
        self.run = run
        self.n = run.layout.n
        self.k = run.layout.sizes[i]
        self.earlier = run.layout.earlier(i)
        self.later = run.layout.later(i)
        self.unary = run.layout.unary[i]
        self.B = INF
        self.prefix: Optional[Cpa] = None
        self.next_value = 0
        self.seen: Optional[tuple[int, int]] = None
        self.done = False

    # -- bookkeeping -------------------------------------------------------

    def _observe(self, cpa: Cpa, net: Network) -> None:
        run = self.run
        if run.ledger is not None and self.seen is not None:
            entries = run.trail.added_between(self.seen, cpa.token, cpa.pos)
            if entries is not None:
                foreign = [e for e in entries if e[1] != self.i]
                if len(foreign) == 1:
                    run.ledger.record_many(foreign[0][1], self.i, foreign)
        self.seen = (cpa.token, cpa.pos)

    def _send_cpa(self, net: Network, to: int, kind: str, cpa: Cpa) -> None:
        self.seen = (cpa.token, cpa.pos)
        net.send(self.i, to, kind, cpa)

    def _declare(self, net: Network, values: tuple[int, ...], cost) -> None:
        self.B = cost
        self.run.declare(values, cost)
        net.broadcast(self.i, "NEW_SOLUTION", (values, cost))

    def _lookups(self, net: Network, links, mine: int, values) -> tuple[Any, list]:
        total = 0
        entries = []
        for lk in links:
            theirs = values[lk.other - 1]
            total += lk.table[mine, theirs]
            entries.append(lk.entry(mine, theirs))
        if entries:
            net.ctx(self.i).charge(len(entries))
        return total, entries

    # -- protocol ------------------------------------------------------------

    def start(self, net: Network) -> None:
        if self.i == 1:
            self.prefix = Cpa((), 0, 0, 0)
            self.seen = (0, 0)
            self._assign(net)

    def _assign(self, net: Network) -> None:
        run, mode, prefix = self.run, self.run.mode, self.prefix
        while self.next_value < self.k:
            v = self.next_value
            self.next_value += 1
            f, entries = self._lookups(net, self.earlier, v, prefix.values)
            for table in self.unary:
                f += table[v]
                net.ctx(self.i).charge(1)
            cost = prefix.cost + f
            if cost >= self.B:
                continue
            values = prefix.values + (v,)
            if values in run.prefixes_tried:
                run.repeated_prefix = True
            run.prefixes_tried.add(values)
            token = run.trail.child(prefix.token, prefix.pos)
            cpa = Cpa(values, cost, token, run.trail.add(token, entries), last_id=self.i)
            if mode == "1ph" and self.i > 1:
                self._send_cpa(net, self.i - 1, "CPA_BACK_MSG", cpa)
                return
            if self.i < self.n:
                self._send_cpa(net, self.i + 1, "CPA_MSG", cpa)
                return
            if mode == "2ph" and self.n > 1:
                self._send_cpa(net, self.n - 1, "CPA_BACK_MSG", cpa)
                return
            self._declare(net, values, cost)
        if self.i == 1:
            self.done = True
            net.broadcast(self.i, "TERMINATE")
            net.terminate()
        else:
            self._send_cpa(net, self.i - 1, "CPA_MSG", self.prefix)

    def _back_check(self, cpa: Cpa, net: Network) -> None:
        mine = cpa.values[self.i - 1]
        if self.run.mode == "1ph":
            j = cpa.last_id
            lk = next((lk for lk in self.later if lk.other == j), None)
            f, entries = self._lookups(net, [lk] if lk else [], mine, cpa.values)
            target_on_breach = j
        else:
            j = self.n
            f, entries = self._lookups(net, self.later, mine, cpa.values)
            target_on_breach = self.n
        total = cpa.cost + f
        if total >= self.B:
            self._send_cpa(net, target_on_breach, "CPA_MSG", cpa)
            return
        pos = self.run.trail.add(cpa.token, entries)
        if self.i != 1:
            self._send_cpa(net, self.i - 1, "CPA_BACK_MSG", Cpa(cpa.values, total, cpa.token, pos, j))
        elif j == self.n:
            self._declare(net, cpa.values, total)
            self._send_cpa(net, self.n, "CPA_MSG", Cpa(cpa.values, total, cpa.token, pos, j))
        else:
            self._send_cpa(net, j + 1, "CPA_MSG", Cpa(cpa.values, total, cpa.token, pos, j))

    def handle(self, msg: Message, net: Network) -> None:
        if self.done:
            return
        kind = msg.kind
        if kind == "NEW_SOLUTION":
            cost = msg.payload[1]
            if cost < self.B:
                self.B = cost
        elif kind == "TERMINATE":
            self.done = True
        elif kind == "CPA_BACK_MSG":
            self._observe(msg.payload, net)
            self._back_check(msg.payload, net)
        elif kind == "CPA_MSG":
            cpa: Cpa = msg.payload
            self._observe(cpa, net)
            if len(cpa.values) == self.i - 1:
                self.prefix = cpa
                self.next_value = 0
            self._assign(net)
        else:
            raise ValueError(f"unexpected message {kind}")


def _run(problem, layout: Layout, mode: str, algorithm: str, cfg: ScheduleConfig, ledger, stop):
    run = _Run(layout, mode, ledger)
    net = Network(range(1, layout.n + 1), cfg, ledger)
    agents = {i: SyncAgent(i, run) for i in range(1, layout.n + 1)}
    if layout.n == 0:
        net.terminate()
        return run, net
    run_asynchronous(agents, net, stop)
    return run, net


def _schedule(seed: int, policy: str, trace: bool = False) -> ScheduleConfig:
    return ScheduleConfig(mode="asynchronous", seed=seed, message_order_policy=policy, trace=trace)


def _finish(algorithm: str, run: _Run, net: Network, ledger, cost_of=None) -> RunReport:
    cost = run.best_cost if run.best is not None else None
    report = finish_report(algorithm, net, run.best, cost, ledger)
    report.extra["bounds"] = list(run.bounds)
    report.extra["repeated_prefix"] = run.repeated_prefix
    if net.trace is not None:
        report.extra["trace"] = net.trace
    return report


def sync_bb(problem: Dcop, seed: int = 0, policy: str = "fifo", trace: bool = False) -> RunReport:
    """SyncBB on a symmetric DCOP, one simulated agent per variable."""
    if not isinstance(problem, Dcop):
        raise TypeError("sync_bb expects a symmetric Dcop; use aggregate_symmetric or to_peav")
    run, net = _run(problem, dcop_layout(problem), "sym", "syncbb", _schedule(seed, policy, trace), None, None)
    return _finish("syncbb", run, net, None)


class OneSidedResult(NamedTuple):
    assignment: tuple[int, ...]
    claimed_cost: Any
    true_cost: Any
    report: RunReport


def one_sided_sync_bb(instance: AdcopInstance, seed: int = 0, policy: str = "fifo") -> OneSidedResult:
    """Plain SyncBB that only ever sees each constraint from its later agent."""
    run, net = _run(instance, adcop_layout(instance), "onesided", "onesided-syncbb", _schedule(seed, policy), None, None)
    report = _finish("onesided-syncbb", run, net, None)
    true_cost = evaluate_global(instance, run.best)
    report.extra["claimed_cost"] = run.best_cost
    report.cost = true_cost
    return OneSidedResult(run.best, run.best_cost, true_cost, report)


def sync_abb_2ph(
    instance: AdcopInstance,
    seed: int = 0,
    policy: str = "fifo",
    trace: bool = False,
    stop: Callable[[Network], bool] | None = None,
) -> RunReport:
    ledger = PrivacyLedger(instance)
    run, net = _run(instance, adcop_layout(instance), "2ph", "syncabb2ph", _schedule(seed, policy, trace), ledger, stop)
    return _finish("syncabb2ph", run, net, ledger)


def sync_abb(
    instance: AdcopInstance,
    seed: int = 0,
    policy: str = "fifo",
    trace: bool = False,
    stop: Callable[[Network], bool] | None = None,
) -> RunReport:
    ledger = PrivacyLedger(instance)
    run, net = _run(instance, adcop_layout(instance), "1ph", "syncabb", _schedule(seed, policy, trace), ledger, stop)
    return _finish("syncabb", run, net, ledger)
