"""Name-based dispatch to every solver, returning uniform run reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .complete import afb, atwb, brute_force_optimal, one_sided_sync_bb, sync_abb, sync_abb_2ph, sync_bb
from .local import acls, dsa, gca_mgm, max_sum, mcs_mgm, mgm, mgm2
from .metrics import PrivacyLedger, RunReport, average_privacy_loss, max_privacy_gain
from .model import AdcopInstance
from .simnet import Network
from .transforms import aggregate_symmetric, to_peav

COMPLETE = ("bruteforce", "syncabb", "syncabb2ph", "atwb", "syncbb", "afb", "syncbb-peav", "afb-peav", "onesided-syncbb")
LOCAL = ("dsa", "mgm", "mgm2", "maxsum", "acls", "mcsmgm", "gcamgm")
ALGORITHMS = COMPLETE + LOCAL


@dataclass
class AlgoParams:
    cycles: int = 200
    p: Optional[float] = None
    coord_c: float = 1.0
    offer_probability: float = 0.5
    threshold: Optional[float] = None
    policy: str = "fifo"
    extra: dict[str, Any] = field(default_factory=dict)


class UnknownAlgorithmError(KeyError):
    pass


def _disclosed(report: RunReport, instance: AdcopInstance) -> RunReport:
    """Centralised and symmetric baselines start from full disclosure of every side."""
    ledger = PrivacyLedger(instance)
    ledger.disclose_all()
    report.avg_privacy_loss = average_privacy_loss(ledger)
    report.max_privacy_gain = max_privacy_gain(ledger)
    return report


def _projected(report: RunReport, instance: AdcopInstance, peav) -> RunReport:
    if report.assignment is not None:
        original = peav.project(report.assignment)
        report.assignment = original
        report.cost = instance.evaluate(original)
    return report


def _stop(threshold: Optional[float]) -> Optional[Callable[[Network], bool]]:
    if threshold is None:
        return None
    if not 0 <= threshold <= 100:
        raise ValueError("threshold must lie in [0, 100]")
    return lambda net: max_privacy_gain(net.ledger) > threshold


def run_algorithm(name: str, instance: AdcopInstance, seed: int = 0, params: Optional[AlgoParams] = None) -> RunReport:
    params = params or AlgoParams()
    pol = params.policy
    if name == "bruteforce":
        best, cost = brute_force_optimal(instance)
        return _disclosed(RunReport("bruteforce", best, cost, optimal_cost=cost), instance)
    if name == "syncabb":
        return sync_abb(instance, seed=seed, policy=pol, stop=_stop(params.threshold))
    if name == "syncabb2ph":
        return sync_abb_2ph(instance, seed=seed, policy=pol, stop=_stop(params.threshold))
    if name == "atwb":
        return atwb(instance, seed=seed, policy=pol, stop=_stop(params.threshold))
    if name == "syncbb":
        return _disclosed(sync_bb(aggregate_symmetric(instance), seed=seed, policy=pol), instance)
    if name == "afb":
        return _disclosed(afb(aggregate_symmetric(instance), seed=seed, policy=pol), instance)
    if name in ("syncbb-peav", "afb-peav"):
        peav = to_peav(instance)
        solver = sync_bb if name == "syncbb-peav" else afb
        report = solver(peav.dcop, seed=seed, policy=pol)
        report.algorithm = name
        return _projected(report, instance, peav)
    if name == "onesided-syncbb":
        return one_sided_sync_bb(instance, seed=seed, policy=pol).report
    if name == "dsa":
        return dsa(instance, p=0.6 if params.p is None else params.p, cycles=params.cycles, seed=seed)
    if name == "mgm":
        return mgm(instance, cycles=params.cycles, seed=seed)
    if name == "mgm2":
        return mgm2(instance, cycles=params.cycles, offer_probability=params.offer_probability, seed=seed)
    if name == "maxsum":
        return max_sum(instance, cycles=params.cycles, seed=seed)
    if name == "acls":
        return acls(instance, p=0.5 if params.p is None else params.p, C=params.coord_c, cycles=params.cycles, seed=seed)
    if name == "mcsmgm":
        return mcs_mgm(instance, cycles=params.cycles, seed=seed)
    if name == "gcamgm":
        return gca_mgm(instance, cycles=params.cycles, seed=seed)
    raise UnknownAlgorithmError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
