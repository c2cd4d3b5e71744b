"""MGM-2: MGM with coordinated moves of neighbouring pairs.

Every cycle an agent becomes an offerer with probability ``q``. An offerer
picks a random neighbour and quotes, for each of its values, its cost
without that neighbour plus its whole side of the shared constraint. A
non-offerer scores every joint move in the offers it received and accepts
the best one if it gains. Committed pairs then compete with their joint
gain exactly like single agents do in MGM; a pair moves only if both
partners win their neighbourhoods.

Single-agent gains count only the agent's own sides, which under symmetric
costs is half of the true global change. The joint gain is kept on that
same scale: each partner's change without the shared constraint plus the
mean change of the two shared sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..metrics import RunReport
from ..model import AdcopInstance
from ..simnet import Message, Network
from .common import beats
from .common import run_local
from .mgm import Mgm


@dataclass
class Offer:
    rest: np.ndarray
    """Offerer's cost for each of its values, excluding the shared constraint."""
    shared: np.ndarray
    """Offerer's side of the shared constraint, ``[offerer value, receiver value]``."""
    current: int


@dataclass
class Commitment:
    partner: int
    value: int
    partner_value: int
    gain: float
    go: bool = False


class Mgm2(Mgm):
    name = "mgm2"
    phases = ("values", "offer", "respond", "gain", "confirm", "move")

    def __init__(self, instance: AdcopInstance, offer_probability: float = 0.5):
        if not 0 <= offer_probability <= 1:
            raise ValueError("offer_probability must lie in [0, 1]")
        super().__init__(instance)
        self.q = offer_probability
        self.offering: dict[int, Optional[int]] = {a: None for a in self.links}
        self.commit: dict[int, Optional[Commitment]] = {a: None for a in self.links}

    def _rest(self, a: int, b: int, view: dict[int, int], net: Optional[Network] = None) -> np.ndarray:
        rest = self.local_costs(a, net, view)
        return rest - self.tables[a][b][:, view[b]]

    def joint_gain(self, r: int, o: int, offer: Offer, view: dict[int, int], net: Optional[Network] = None) -> np.ndarray:
        """Gain of every joint move ``(offerer value, receiver value)``, scaled like a single-agent gain."""
        cur_r, cur_o = self.values[r], offer.current
        rest_r = self._rest(r, o, view, net)
        mine = self.tables[r][o]
        shared_now = offer.shared[cur_o, cur_r] + mine[cur_r, cur_o]
        shared_new = offer.shared + mine.T
        gain_o = offer.rest[cur_o] - offer.rest
        gain_r = rest_r[cur_r] - rest_r
        return gain_o[:, None] + gain_r[None, :] + (shared_now - shared_new) / 2.0

    def _make_offer(self, a: int, b: int, view: dict[int, int], net: Optional[Network] = None) -> Offer:
        return Offer(self._rest(a, b, view, net), self.tables[a][b], self.values[a])

    def run_phase(self, phase: str, a: int, inbox: list[Message], net: Network) -> None:
        if phase == "values":
            self.offering[a] = None
            self.commit[a] = None
            self.send_value(a, net)
        elif phase == "offer":
            self.read_values(a, inbox)
            if self.q > 0 and self.links[a] and net.ctx(a).rng.random() < self.q:
                nbrs = sorted(self.links[a])
                b = nbrs[int(net.ctx(a).rng.integers(len(nbrs)))]
                self.offering[a] = b
                offer = self._make_offer(a, b, self.cache[a], net)
                lk = self.links[a][b]
                quoted = tuple(lk.entry(u, w) for u in range(self.sizes[a]) for w in range(self.sizes[b]))
                net.send(a, b, "OFFER", offer, reveals=quoted)
        elif phase == "respond":
            if self.offering[a] is not None:
                return
            best = None
            offers = sorted((m.sender, m.payload) for m in inbox if m.kind == "OFFER")
            for o, offer in offers:
                gains = self.joint_gain(a, o, offer, self.cache[a], net)
                flat = int(np.argmax(gains))
                g = float(gains.flat[flat])
                if g > 0 and (best is None or g > best[0]):
                    u, w = np.unravel_index(flat, gains.shape)
                    best = (g, o, int(u), int(w))
            for o, _ in offers:
                if best is not None and o == best[1]:
                    g, _, u, w = best
                    self.commit[a] = Commitment(o, w, u, g)
                    net.send(a, o, "ACCEPT", (u, w, g))
                else:
                    net.send(a, o, "REJECT")
        elif phase == "gain":
            for m in inbox:
                if m.kind == "ACCEPT":
                    u, w, g = m.payload
                    self.commit[a] = Commitment(m.sender, u, w, g)
            c = self.commit[a]
            if c is None:
                self.compute_gain(a, net)
            else:
                self.gain[a] = c.gain
            self.send_gain(a, net)
        elif phase == "confirm":
            self.read_gains(a, inbox)
            c = self.commit[a]
            if c is None:
                if self.wins(a):
                    self.values[a] = self.candidate[a]
                return
            c.go = all(beats(c.gain, a, g, b) for b, g in self.heard[a].items() if b != c.partner)
            net.send(a, c.partner, "GO" if c.go else "NOGO")
        else:
            c = self.commit[a]
            if c is None:
                return
            partner_go = any(m.kind == "GO" for m in inbox)
            if c.go and partner_go:
                self.values[a] = c.value

    def stable(self) -> bool:
        if not super().stable():
            return False
        if self.q == 0:
            return True
        for a in self.links:
            for b in self.links[a]:
                if b < a:
                    continue
                view_b = self.true_view(b)
                offer = Offer(self._rest(a, b, self.true_view(a)), self.tables[a][b], self.values[a])
                if self.joint_gain(b, a, offer, view_b).max() > 0:
                    return False
        return True


def mgm2(
    instance: AdcopInstance,
    cycles: int = 200,
    offer_probability: float = 0.5,
    seed: int = 0,
    optimal_cost=None,
) -> RunReport:
    return run_local(Mgm2(instance, offer_probability), seed, cycles, optimal_cost)
