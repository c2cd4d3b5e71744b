"""Seeded random ADCOP generators: Max-DisCSP, graphical games and scale-free networks.

All generators produce binary instances with one variable per agent.
Edges are listed in increasing ``(i, j)`` order so that a seed fully
determines the instance bytes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .model import AdcopInstance


@dataclass(frozen=True)
class MaxDiscspParams:
    n: int
    k: int
    p1: float
    p2: float
    seed: int = 0

    def __post_init__(self) -> None:
        _check_size(self.n, self.k)
        _check_prob(p1=self.p1, p2=self.p2)


@dataclass(frozen=True)
class GameParams:
    """Erdos-Renyi graph with per-entry costs: 0 with probability ``z``, else uniform in ``[lo, hi]``.

    Give either ``p`` (edge probability) or ``degree`` (target mean degree,
    realised as exactly ``round(n * degree / 2)`` edges).
    """

    n: int
    k: int
    p: Optional[float] = None
    degree: Optional[float] = None
    z: float = 0.35
    lo: int = 1
    hi: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        _check_size(self.n, self.k)
        if (self.p is None) == (self.degree is None):
            raise ValueError("give exactly one of p and degree")
        if self.p is not None:
            _check_prob(p=self.p)
        if self.degree is not None and not 0 <= self.degree <= self.n - 1:
            raise ValueError(f"mean degree must lie in [0, {self.n - 1}]")
        _check_costs(self.z, self.lo, self.hi)


@dataclass(frozen=True)
class ScaleFreeParams:
    n: int
    k: int
    m0: int = 10
    m: int = 4
    z: float = 0.35
    lo: int = 1
    hi: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        _check_size(self.n, self.k)
        if not 1 <= self.m <= self.m0 <= self.n:
            raise ValueError("need 1 <= m <= m0 <= n")
        _check_costs(self.z, self.lo, self.hi)


Params = Union[MaxDiscspParams, GameParams, ScaleFreeParams]


def _check_size(n: int, k: int) -> None:
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")


def _check_prob(**probs: float) -> None:
    for name, value in probs.items():
        if not 0 <= value <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_costs(z: float, lo: int, hi: int) -> None:
    _check_prob(z=z)
    if lo > hi:
        raise ValueError("cost range needs lo <= hi")
    if lo < 0:
        raise ValueError("costs must be non-negative")


def _er_edges(rng: np.random.Generator, n: int, p: float) -> list[tuple[int, int]]:
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return [e for e, kept in zip(pairs, keep) if kept]


def _quota_edges(rng: np.random.Generator, n: int, degree: float) -> list[tuple[int, int]]:
    pairs = list(itertools.combinations(range(n), 2))
    count = min(len(pairs), int(round(n * degree / 2)))
    chosen = rng.choice(len(pairs), size=count, replace=False)
    return sorted(pairs[i] for i in chosen)


def _scale_free_edges(rng: np.random.Generator, n: int, m0: int, m: int) -> list[tuple[int, int]]:
    edges: set[tuple[int, int]] = set()
    # seed agents: a random spanning tree, then random extra edges up to mean degree m
    order = rng.permutation(m0)
    for t in range(1, m0):
        u, w = int(order[t]), int(order[rng.integers(t)])
        edges.add((min(u, w), max(u, w)))
    target = min(m0 * (m0 - 1) // 2, max(m0 - 1, int(round(m0 * m / 2))))
    missing = [e for e in itertools.combinations(range(m0), 2) if e not in edges]
    extra = target - len(edges)
    if extra > 0:
        for i in rng.choice(len(missing), size=extra, replace=False):
            edges.add(missing[i])
    # urn of edge endpoints: drawing from it is degree-proportional
    urn = [v for e in sorted(edges) for v in e]
    if not urn:
        urn = list(range(m0))
    for new in range(m0, n):
        targets: set[int] = set()
        while len(targets) < min(m, new):
            targets.add(urn[int(rng.integers(len(urn)))])
        for t in sorted(targets):
            edges.add((t, new))
            urn.extend((t, new))
    return sorted(edges)


def _binary_sides(rng: np.random.Generator, k: int, p2: float) -> list[np.ndarray]:
    return [(rng.random((k, k)) < p2).astype(np.int64) for _ in range(2)]


def _game_sides(rng: np.random.Generator, k: int, z: float, lo: int, hi: int) -> list[np.ndarray]:
    sides = []
    for _ in range(2):
        zero = rng.random((k, k)) < z
        vals = rng.integers(lo, hi + 1, size=(k, k))
        sides.append(np.where(zero, 0, vals).astype(np.int64))
    return sides


def _game_alphabet(z: float, lo: int, hi: int) -> tuple[int, ...]:
    return tuple(sorted({0} | set(range(lo, hi + 1))))


def gen_max_discsp(params: MaxDiscspParams) -> AdcopInstance:
    """Each side marks each value pair forbidden (cost 1) with probability ``p2``."""
    rng = np.random.default_rng(params.seed)
    edges = _er_edges(rng, params.n, params.p1)
    cons = [((i, j), _binary_sides(rng, params.k, params.p2)) for i, j in edges]
    return AdcopInstance.build([params.k] * params.n, cons, cost_alphabet=(0, 1))


def gen_graphical_game(params: GameParams) -> AdcopInstance:
    rng = np.random.default_rng(params.seed)
    if params.p is not None:
        edges = _er_edges(rng, params.n, params.p)
    else:
        edges = _quota_edges(rng, params.n, params.degree)
    cons = [((i, j), _game_sides(rng, params.k, params.z, params.lo, params.hi)) for i, j in edges]
    return AdcopInstance.build([params.k] * params.n, cons, cost_alphabet=_game_alphabet(params.z, params.lo, params.hi))


def gen_scale_free(params: ScaleFreeParams) -> AdcopInstance:
    """Barabasi-Albert growth from a connected random seed graph on ``m0`` agents."""
    rng = np.random.default_rng(params.seed)
    edges = _scale_free_edges(rng, params.n, params.m0, params.m)
    cons = [((i, j), _game_sides(rng, params.k, params.z, params.lo, params.hi)) for i, j in edges]
    return AdcopInstance.build([params.k] * params.n, cons, cost_alphabet=_game_alphabet(params.z, params.lo, params.hi))


def generate(params: Params) -> AdcopInstance:
    if isinstance(params, MaxDiscspParams):
        return gen_max_discsp(params)
    if isinstance(params, GameParams):
        return gen_graphical_game(params)
    if isinstance(params, ScaleFreeParams):
        return gen_scale_free(params)
    raise TypeError(f"unknown generator parameters {type(params).__name__}")


@dataclass(frozen=True)
class Preset:
    name: str
    params: Params
    note: str = ""


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset("setup1", MaxDiscspParams(10, 10, 0.4, 0.5), "complete search, p2 swept 0.1-0.9"),
        Preset("setup2", MaxDiscspParams(6, 6, 0.5, 0.5), "complete search vs symmetric baselines"),
        Preset("setup3-games", GameParams(6, 6, degree=2.5, z=0.5, lo=0, hi=9), "mean degree swept 2.5-5"),
        Preset("setup1-desk", MaxDiscspParams(7, 4, 0.4, 0.5), "oracle-sized complete search"),
        Preset("ls-discsp", MaxDiscspParams(200, 10, 0.05, 0.7)),
        Preset("ls-er", GameParams(200, 10, p=0.025)),
        Preset("ls-ba", ScaleFreeParams(200, 10, m0=10, m=4)),
        Preset("ls-discsp-desk", MaxDiscspParams(50, 10, 0.2, 0.7), "mean degree about 10"),
        Preset("ls-er-desk", GameParams(50, 10, p=0.1), "mean degree about 5"),
        Preset("ls-ba-desk", ScaleFreeParams(50, 10, m0=10, m=4)),
    ]
}


def preset_params(name: str, seed: int = 0, **overrides) -> Params:
    try:
        base = PRESETS[name].params
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return replace(base, seed=seed, **overrides)


def from_preset(name: str, seed: int = 0, **overrides) -> AdcopInstance:
    return generate(preset_params(name, seed, **overrides))
