from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from adcop.complete import brute_force_optimal
from adcop.model import AdcopInstance, AsymmetricConstraint, is_local_optimum
from adcop.transforms import (
    UnsoundPenaltyError,
    aggregate_symmetric,
    default_penalty,
    peav_size,
    to_peav,
    unary_decomposition_exists,
)

from .conftest import random_adcop


def peav_cell(peav, x1, x2, x1_mirror, x2_mirror):
    """PEAV assignment from original values and the mirrors each agent holds."""
    pa = [0] * peav.dcop.n_vars
    pa[peav.original_vars[0]] = x1
    pa[peav.original_vars[1]] = x2
    pa[peav.mirrors[(1, 1)]] = x2_mirror  # A1's copy of x2
    pa[peav.mirrors[(2, 0)]] = x1_mirror  # A2's copy of x1
    return tuple(pa)


class TestPeav:
    def test_figure1_consistent_cell(self, figure1):
        peav = to_peav(figure1, penalty=50)
        assert peav.dcop.evaluate(peav_cell(peav, 0, 0, 0, 0)) == 7

    def test_figure1_two_violations(self, figure1):
        # A1 holds x1=a and sees x2 as x; A2 holds x2=y and sees x1 as b
        peav = to_peav(figure1, penalty=50)
        assert peav.dcop.evaluate(peav_cell(peav, 0, 1, 1, 0)) == 3 + 8 + 50 + 50

    def test_no_constraints(self):
        inst = AdcopInstance.build([2, 3], [])
        peav = to_peav(inst)
        assert peav.dcop.n_vars == 2 and not peav.mirrors and not peav.dcop.constraints

    def test_unsound_penalty(self, figure1):
        with pytest.raises(UnsoundPenaltyError):
            to_peav(figure1, penalty=15)
        assert default_penalty(figure1) == 16
        assert to_peav(figure1).penalty == 16

    @pytest.mark.parametrize("seed", range(6))
    def test_faithful_on_consistent(self, seed):
        inst = random_adcop(4, 3, 0.7, seed)
        peav = to_peav(inst)
        for a in inst.assignments():
            pa = peav.lift(a)
            assert peav.is_consistent(pa)
            assert peav.project(pa) == a
            assert peav.dcop.evaluate(pa) == inst.evaluate(a)

    def test_one_mirror_per_neighbour(self):
        inst = random_adcop(5, 2, 0.6, seed=3)
        peav = to_peav(inst)
        for c in inst.constraints:
            u, w = c.scope
            assert (inst.owners[u], w) in peav.mirrors and (inst.owners[w], u) in peav.mirrors
            assert peav.dcop.owners[peav.mirrors[(inst.owners[u], w)]] == inst.owners[u]

    @pytest.mark.parametrize("seed", range(4))
    def test_trap_consistent_assignments_are_local_optima(self, seed):
        inst = random_adcop(3, 2, 0.9, seed)
        peav = to_peav(inst)
        for pa in peav.consistent_assignments():
            assert is_local_optimum(peav.dcop, pa)


class TestPeavSize:
    def test_ten_agents_eighteen_edges(self):
        edges = list(itertools.combinations(range(10), 2))[:18]
        t = np.zeros((2, 2))
        inst = AdcopInstance.build([2] * 10, [(e, [t, t]) for e in edges])
        report = peav_size(inst)
        assert report.variable_count == 46
        assert abs(report.density - 0.07) <= 0.005
        assert peav_size(inst).variable_count == to_peav(inst).dcop.n_vars

    def test_edgeless(self):
        assert peav_size(AdcopInstance.build([3] * 4, [])).variable_count == 4


class TestAggregate:
    def test_figure1(self, figure1):
        assert aggregate_symmetric(figure1).evaluate((1, 0)) == 9

    def test_zero(self):
        t = np.zeros((2, 2), dtype=int)
        agg = aggregate_symmetric(AdcopInstance.build([2, 2], [((0, 1), [t, t])]))
        assert not agg.constraints[0].table.any()

    @pytest.mark.parametrize("seed", range(5))
    def test_preserves_cost(self, seed):
        inst = random_adcop(5, 3, 0.6, seed)
        agg = aggregate_symmetric(inst)
        for a in inst.assignments():
            assert agg.evaluate(a) == inst.evaluate(a)
        assert brute_force_optimal(agg)[1] == brute_force_optimal(inst)[1]


def constraint(si, sj) -> AsymmetricConstraint:
    return AsymmetricConstraint((0, 1), (np.asarray(si), np.asarray(sj)))


def system_matrix(k: int) -> list[list[Fraction]]:
    """Rows: U_i(a) + B(a, b) = S_i(a, b), then U_j(b) + B(a, b) = S_j(a, b)."""
    nvar = 2 * k + k * k
    rows = []
    for side in (0, 1):
        for a in range(k):
            for b in range(k):
                r = [Fraction(0)] * nvar
                r[a if side == 0 else k + b] = Fraction(1)
                r[2 * k + a * k + b] = Fraction(1)
                rows.append(r)
    return rows


def left_null_space(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Exact basis of {y : y A = 0} by Gauss-Jordan on [A | I]."""
    m, nvar = len(rows), len(rows[0])
    aug = [r[:] + [Fraction(int(i == j)) for j in range(m)] for i, r in enumerate(rows)]
    pivot_row = 0
    for col in range(nvar):
        pivot = next((r for r in range(pivot_row, m) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[pivot_row], aug[pivot] = aug[pivot], aug[pivot_row]
        for r in range(m):
            if r != pivot_row and aug[r][col] != 0:
                f = aug[r][col] / aug[pivot_row][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[pivot_row])]
        pivot_row += 1
    return [r[nvar:] for r in aug[pivot_row:]]


class TestUnaryDecomposition:
    def test_figure1_not_decomposable(self, figure1):
        assert not unary_decomposition_exists(figure1.constraints[0])

    def test_equal_sides(self):
        t = np.arange(9).reshape(3, 3)
        assert unary_decomposition_exists(constraint(t, t))

    @pytest.mark.parametrize("seed", range(10))
    def test_constructed_decomposable(self, seed):
        rng = np.random.default_rng(seed)
        ui, uj, b = rng.integers(0, 5, 4), rng.integers(0, 5, 4), rng.integers(0, 9, (4, 4))
        assert unary_decomposition_exists(constraint(ui[:, None] + b, uj[None, :] + b))

    def test_agrees_with_linear_solver_exhaustively(self):
        # A x = b is solvable iff b is orthogonal to the left null space of A
        null = left_null_space(system_matrix(2))
        assert null
        den = np.lcm.reduce([f.denominator for v in null for f in v])
        basis = np.array([[int(f * den) for f in v] for v in null], dtype=np.int64)
        tables = np.array(list(itertools.product(range(5), repeat=4)), dtype=np.int64)
        rhs = np.concatenate(
            [np.repeat(tables, len(tables), axis=0), np.tile(tables, (len(tables), 1))], axis=1
        )
        assert len(rhs) == 390_625
        solvable = ~(rhs @ basis.T).any(axis=1)
        diff = (rhs[:, :4] - rhs[:, 4:]).reshape(-1, 2, 2)
        contrast = diff[:, 0, 0] - diff[:, 0, 1] - diff[:, 1, 0] + diff[:, 1, 1]
        assert np.array_equal(solvable, contrast == 0)
        assert solvable.any() and not solvable.all()
        # the library function itself on a stride through the same space
        for idx in range(0, len(rhs), 997):
            si, sj = rhs[idx, :4].reshape(2, 2), rhs[idx, 4:].reshape(2, 2)
            assert unary_decomposition_exists(constraint(si, sj)) == bool(solvable[idx])
