from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adcop.model import (
    AdcopInstance,
    DomainError,
    IncompleteScopeError,
    UnknownAgentError,
    evaluate_agent,
    evaluate_global,
    is_local_optimum,
    is_nash_stable,
    neighbors,
    side_cost,
)
from adcop.generators import GameParams, gen_graphical_game

from .conftest import random_adcop, symmetric_adcop


def table_walk(instance: AdcopInstance, a) -> int:
    """Independent re-summation: visit every entry and add the matching ones."""
    total = 0
    for c in instance.constraints:
        for side in c.sides:
            for cell in itertools.product(*(range(s) for s in side.shape)):
                if all(a[v] == x for v, x in zip(c.scope, cell)):
                    total += int(side[cell])
    return total


class TestEvaluate:
    def test_figure1_global(self, figure1):
        assert evaluate_global(figure1, (1, 0)) == 9

    def test_figure1_agent(self, figure1):
        assert evaluate_agent(figure1, 1, (1, 0)) == 7
        assert evaluate_agent(figure1, 2, (1, 0)) == 2

    def test_no_constraints(self):
        inst = AdcopInstance.build([3, 2], [])
        assert evaluate_global(inst, (2, 1)) == 0
        assert evaluate_agent(inst, 1, (2, 1)) == 0

    def test_matches_table_walk(self):
        inst = random_adcop(4, 3, 0.8, seed=5)
        for a in inst.assignments():
            assert evaluate_global(inst, a) == table_walk(inst, a)

    def test_value_outside_domain(self, figure1):
        with pytest.raises(DomainError):
            evaluate_global(figure1, (2, 0))

    def test_unknown_agent(self, figure1):
        with pytest.raises(UnknownAgentError):
            evaluate_agent(figure1, 3, (0, 0))

    def test_constraint_order_irrelevant(self):
        inst = random_adcop(5, 3, 0.7, seed=2)
        cons = list(inst.constraints)
        random.Random(0).shuffle(cons)
        perm = AdcopInstance(inst.domains, inst.owners, tuple(cons))
        for a in itertools.islice(inst.assignments(), 50):
            assert evaluate_global(inst, a) == evaluate_global(perm, a)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 5), k=st.integers(1, 3))
def test_partition_identity(seed, n, k):
    inst = random_adcop(n, k, 0.6, seed)
    rng = np.random.default_rng(seed)
    a = tuple(int(x) for x in rng.integers(0, k, n))
    assert sum(evaluate_agent(inst, i, a) for i in inst.agents) == evaluate_global(inst, a)


class TestSideCost:
    def test_figure1_cells(self, figure1):
        c = figure1.constraints[0]
        assert side_cost(figure1, c, 2, {0: 0, 1: 0}) == 4
        assert side_cost(figure1, c, 1, {0: 0, 1: 1}) == 6

    def test_zero_constraint(self):
        inst = AdcopInstance.build([2, 2], [((0, 1), [np.zeros((2, 2)), np.zeros((2, 2))])])
        assert side_cost(inst, inst.constraints[0], 1, {0: 1, 1: 1}) == 0

    def test_incomplete_scope(self, figure1):
        with pytest.raises(IncompleteScopeError):
            side_cost(figure1, figure1.constraints[0], 1, {0: 0})

    def test_total(self):
        inst = random_adcop(4, 3, 1.0, seed=1)
        for c in inst.constraints:
            for agent in (inst.owners[v] for v in c.scope):
                for x, y in itertools.product(range(3), repeat=2):
                    assert side_cost(inst, c, agent, {c.scope[0]: x, c.scope[1]: y}) >= 0


class TestInvariants:
    def test_duplicate_pair_rejected(self):
        t = np.zeros((2, 2))
        with pytest.raises(ValueError):
            AdcopInstance.build([2, 2], [((0, 1), [t, t]), ((1, 0), [t, t])])

    def test_undeclared_variable(self):
        t = np.zeros((2, 2))
        with pytest.raises(ValueError):
            AdcopInstance.build([2, 2], [((0, 5), [t, t])])

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            AdcopInstance.build([2, 2], [((0, 1), [[[-1, 0], [0, 0]], np.zeros((2, 2))])])


def unary(costs) -> AdcopInstance:
    return AdcopInstance.build([len(costs)], [((0,), [costs])])


class TestPredicates:
    def test_single_agent_argmin(self):
        inst = unary([4, 1, 3])
        assert is_local_optimum(inst, (1,))
        assert not is_local_optimum(inst, (0,))

    def test_zero_move_is_not_improving(self):
        inst = unary([2, 2])
        assert is_local_optimum(inst, (0,))

    def test_zero_cost_is_nash(self):
        inst = AdcopInstance.build([3, 3], [((0, 1), [np.zeros((3, 3)), np.zeros((3, 3))])])
        assert all(is_nash_stable(inst, a) for a in inst.assignments())

    def test_figure1_has_no_nash_point(self, figure1):
        # exhaustive best-response check
        def stable(a):
            for agent in (1, 2):
                var = agent - 1
                for v in range(2):
                    b = list(a)
                    b[var] = v
                    if evaluate_agent(figure1, agent, b) < evaluate_agent(figure1, agent, a):
                        return False
            return True

        for a in figure1.assignments():
            assert is_nash_stable(figure1, a) == stable(a)
        assert not any(is_nash_stable(figure1, a) for a in figure1.assignments())

    def test_local_optimum_moves_non_negative(self):
        inst = random_adcop(4, 3, 0.8, seed=9)
        for a in inst.assignments():
            if is_local_optimum(inst, a):
                base = evaluate_global(inst, a)
                for var in range(4):
                    for v in range(3):
                        b = list(a)
                        b[var] = v
                        assert evaluate_global(inst, b) >= base

    @pytest.mark.parametrize("seed", range(5))
    def test_equal_sides_local_optimum_is_nash(self, seed):
        inst = symmetric_adcop(4, 3, 0.7, seed)
        for a in inst.assignments():
            if is_local_optimum(inst, a):
                assert is_nash_stable(inst, a)


class TestNeighbors:
    def test_figure1(self, figure1):
        assert neighbors(figure1, 1) == {2}
        assert neighbors(figure1, 2) == {1}

    def test_isolated(self):
        inst = AdcopInstance.build([2, 2], [])
        assert neighbors(inst, 1) == set()

    def test_generator_edges(self):
        inst = gen_graphical_game(GameParams(20, 3, p=0.2, seed=4))
        edges = inst.edges
        for agent in inst.agents:
            expected = {b for a, b in edges if a == agent} | {a for a, b in edges if b == agent}
            assert neighbors(inst, agent) == expected
            for other in neighbors(inst, agent):
                assert agent in neighbors(inst, other)
