"""Deterministic message-passing simulator with NCLO accounting.

Every agent keeps a counter of logical operations. A message is stamped
with its sender's counter and, on delivery, the receiver's counter is
raised to at least that stamp. The largest counter at the end of a run
is the run's non-concurrent logical operation count.
"""

from __future__ import annotations

import logging
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional, Protocol

import numpy as np

log = logging.getLogger(__name__)


class RoutingError(KeyError):
    """Message addressed to an agent the network does not know."""


class ProtocolError(RuntimeError):
    """A run stalled or misbehaved; carries a snapshot of pending messages."""

    def __init__(self, message: str, snapshot: list[str] | None = None):
        super().__init__(message)
        self.snapshot = snapshot or []


@dataclass(slots=True)
class Message:
    sender: int
    receiver: int
    kind: str
    payload: Any
    nclo_stamp: int
    reveals: tuple = ()
    """Private cost entries the receiver learns exactly from this message."""


class AgentContext:
    __slots__ = ("id", "inbox", "nclo", "rng")

    def __init__(self, agent_id: int, seed: int):
        self.id = agent_id
        self.inbox: deque[Message] = deque()
        self.nclo = 0
        self.rng = np.random.default_rng([seed, agent_id])

    def charge(self, n: int = 1) -> None:
        charge(self, n)

    def take_inbox(self) -> list[Message]:
        msgs = list(self.inbox)
        self.inbox.clear()
        return msgs


def charge(ctx: AgentContext, n: int) -> None:
    if n < 1:
        raise ValueError("charge must be positive")
    ctx.nclo += n


def deliver(envelope: Message, receiver_ctx: AgentContext) -> None:
    if envelope.receiver != receiver_ctx.id:
        raise RoutingError(f"message for {envelope.receiver} handed to {receiver_ctx.id}")
    if envelope.nclo_stamp > receiver_ctx.nclo:
        receiver_ctx.nclo = envelope.nclo_stamp
    receiver_ctx.inbox.append(envelope)


@dataclass(frozen=True)
class ScheduleConfig:
    mode: str = "asynchronous"
    seed: int = 0
    max_cycles: int = 200
    message_order_policy: str = "fifo"
    max_steps: int = 50_000_000
    trace: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("synchronous", "asynchronous"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.message_order_policy not in ("fifo", "shuffle"):
            raise ValueError(f"unknown message order policy {self.message_order_policy!r}")
        if self.max_cycles < 0:
            raise ValueError("max_cycles must be non-negative")


class Network:
    """Routes messages between agent contexts and counts them."""

    def __init__(self, agent_ids: Iterable[int], cfg: ScheduleConfig, ledger=None):
        self.cfg = cfg
        self.contexts: dict[int, AgentContext] = {i: AgentContext(i, cfg.seed) for i in agent_ids}
        self.sent: Counter[str] = Counter()
        self.delivered = 0
        self.ledger = ledger
        self.trace: list[str] | None = [] if cfg.trace else None
        self.terminated = False
        self.halted = False
        self.step = 0
        self._fifo: deque[Message] = deque()
        self._channels: dict[tuple[int, int], deque[Message]] = {}
        self._live: list[tuple[int, int]] = []
        self._order_rng = random.Random(cfg.seed)

    def terminate(self) -> None:
        self.terminated = True

    def ctx(self, agent: int) -> AgentContext:
        try:
            return self.contexts[agent]
        except KeyError:
            raise RoutingError(agent) from None

    def send(self, sender: int, receiver: int, kind: str, payload: Any = None, reveals: tuple = ()) -> Message:
        if receiver not in self.contexts:
            raise RoutingError(f"agent {sender} sent {kind} to unknown agent {receiver}")
        msg = Message(sender, receiver, kind, payload, self.contexts[sender].nclo, reveals)
        self.sent[kind] += 1
        if self.cfg.message_order_policy == "fifo" or self.cfg.mode == "synchronous":
            self._fifo.append(msg)
        else:
            chan = (sender, receiver)
            q = self._channels.get(chan)
            if q is None:
                q = self._channels[chan] = deque()
            if not q:
                self._live.append(chan)
            q.append(msg)
        return msg

    def broadcast(self, sender: int, kind: str, payload: Any = None) -> None:
        for other in self.contexts:
            if other != sender:
                self.send(sender, other, kind, payload)

    @property
    def pending(self) -> int:
        return len(self._fifo) + sum(len(q) for q in self._channels.values())

    def _pop(self) -> Optional[Message]:
        if self._fifo:
            return self._fifo.popleft()
        if not self._live:
            return None
        pick = self._order_rng.randrange(len(self._live))
        chan = self._live[pick]
        q = self._channels[chan]
        msg = q.popleft()
        if not q:
            self._live[pick] = self._live[-1]
            self._live.pop()
        return msg

    def _deliver(self, msg: Message) -> None:
        deliver(msg, self.contexts[msg.receiver])
        self.delivered += 1
        self.step += 1
        if msg.reveals and self.ledger is not None:
            self.ledger.record_many(msg.sender, msg.receiver, msg.reveals)
        if self.trace is not None:
            self.trace.append(f"t={self.step} {msg.sender}->{msg.receiver} {msg.kind} nclo={msg.nclo_stamp}")

    def deliver_next(self) -> Optional[Message]:
        msg = self._pop()
        if msg is not None:
            self._deliver(msg)
        return msg

    def flush(self) -> int:
        """Deliver everything pending into inboxes (synchronous barrier)."""
        count = 0
        while (msg := self._pop()) is not None:
            self._deliver(msg)
            count += 1
        return count

    def snapshot(self) -> list[str]:
        pending = list(self._fifo) + [m for q in self._channels.values() for m in q]
        return [f"{m.sender}->{m.receiver} {m.kind}" for m in pending]

    def counters(self) -> dict[int, int]:
        return {i: c.nclo for i, c in self.contexts.items()}

    def global_nclo(self) -> int:
        return max((c.nclo for c in self.contexts.values()), default=0)


class AsyncAgent(Protocol):
    def start(self, net: Network) -> None: ...

    def handle(self, msg: Message, net: Network) -> None: ...


def run_asynchronous(
    agents: Mapping[int, AsyncAgent],
    net: Network,
    stop: Callable[[Network], bool] | None = None,
) -> Network:
    """Message-driven execution until an agent calls :meth:`Network.terminate`.

    Messages still in flight at termination are drained so delivered
    equals sent; handlers of terminated agents are expected to ignore them.
    ``stop`` is polled after every delivery; when it fires the run freezes
    on the spot and ``net.halted`` is set.
    """
    if net.cfg.mode != "asynchronous":
        raise ValueError("run_asynchronous needs an asynchronous schedule")
    for i in sorted(agents):
        agents[i].start(net)
    while True:
        msg = net.deliver_next()
        if msg is None:
            break
        inbox = net.contexts[msg.receiver].inbox
        while inbox:
            agents[msg.receiver].handle(inbox.popleft(), net)
        if stop is not None and not net.terminated and stop(net):
            # frozen mid-run: whatever is still in flight is never delivered
            net.halted = True
            net.terminated = True
            log.debug("run halted by stop condition at step %d", net.step)
            break
        if net.step > net.cfg.max_steps:
            raise ProtocolError(f"exceeded {net.cfg.max_steps} deliveries", net.snapshot()[:50])
    if not net.terminated:
        raise ProtocolError("no deliverable message and no termination", net.snapshot())
    return net


class SyncAlgorithm(Protocol):
    """A synchronous algorithm: per-cycle phases executed by every agent."""

    phases: tuple[str, ...]

    def setup(self, net: Network) -> None: ...

    def run_phase(self, phase: str, agent: int, inbox: list[Message], net: Network) -> None: ...

    def assignment(self) -> tuple[int, ...]: ...

    def quiescent(self) -> bool: ...


@dataclass
class SyncTrace:
    costs: list = field(default_factory=list)
    cycles_run: int = 0
    converged_at: Optional[int] = None


def run_synchronous(algorithm: SyncAlgorithm, net: Network, evaluate: Callable[[tuple[int, ...]], Any]) -> SyncTrace:
    """Cycle-driven execution; messages of one phase arrive before the next.

    Records the global cost of the assignment after setup and after every
    cycle. When the algorithm reports quiescence (a state no further cycle
    can change) the remaining cycles are filled with the final cost.
    """
    if net.cfg.mode != "synchronous":
        raise ValueError("run_synchronous needs a synchronous schedule")
    trace = SyncTrace()
    algorithm.setup(net)
    net.flush()
    trace.costs.append(evaluate(algorithm.assignment()))
    order = sorted(net.contexts)
    for cycle in range(1, net.cfg.max_cycles + 1):
        for phase in algorithm.phases:
            for agent in order:
                algorithm.run_phase(phase, agent, net.contexts[agent].take_inbox(), net)
            net.flush()
        trace.costs.append(evaluate(algorithm.assignment()))
        trace.cycles_run = cycle
        if algorithm.quiescent():
            trace.converged_at = cycle
            trace.costs.extend([trace.costs[-1]] * (net.cfg.max_cycles - cycle))
            break
    for agent in order:
        net.contexts[agent].inbox.clear()
    net.terminated = True
    return trace


def global_nclo(report) -> int:
    """Largest per-agent logical-operation counter of a finished run."""
    counters = report.nclo_per_agent if hasattr(report, "nclo_per_agent") else report
    return max(counters.values(), default=0)
