from __future__ import annotations

import itertools

import numpy as np
import pytest

from adcop.generators import GameParams, MaxDiscspParams, gen_graphical_game, gen_max_discsp
from adcop.model import AdcopInstance

# Two agents, A1 in {a, b} and A2 in {x, y}. Cells A1(b, y) = 5 and
# A2(a, y) = 1 are fixture values, not read from any printed table.
FIG1_SIDE_A1 = [[3, 6], [7, 5]]
FIG1_SIDE_A2 = [[4, 1], [2, 8]]


@pytest.fixture
def figure1() -> AdcopInstance:
    return AdcopInstance.build([2, 2], [((0, 1), [FIG1_SIDE_A1, FIG1_SIDE_A2])])


def random_adcop(n: int, k: int, density: float, seed: int, hi: int = 9) -> AdcopInstance:
    rng = np.random.default_rng(seed)
    cons = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < density:
            cons.append(((i, j), [rng.integers(0, hi + 1, (k, k)), rng.integers(0, hi + 1, (k, k))]))
    return AdcopInstance.build([k] * n, cons)


def small_corpus(count: int, start: int = 0):
    """Mixed Max-DisCSPs and graphical games with n <= 7, k <= 4."""
    for seed in range(start, start + count):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(3, 8))
        k = int(rng.integers(2, 5))
        if seed % 2 == 0:
            yield seed, gen_max_discsp(MaxDiscspParams(n, k, p1=0.5, p2=float(rng.choice([0.3, 0.5, 0.7])), seed=seed))
        else:
            yield seed, gen_graphical_game(GameParams(n, k, p=0.5, z=0.5, lo=0, hi=9, seed=seed))


def symmetric_adcop(n: int, k: int, density: float, seed: int) -> AdcopInstance:
    """Both agents of each constraint hold the same table."""
    rng = np.random.default_rng(seed)
    cons = []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < density:
            t = rng.integers(0, 10, (k, k))
            cons.append(((i, j), [t, t]))
    return AdcopInstance.build([k] * n, cons)


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> bool:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
