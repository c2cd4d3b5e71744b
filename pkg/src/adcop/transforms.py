"""Symmetric reformulations of an ADCOP.

``to_peav`` gives every agent a private mirror of each neighbour's
variable and ties mirrors to originals with penalised equality
constraints; ``aggregate_symmetric`` discloses all sides and sums them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import AdcopInstance, AsymmetricConstraint, Assignment, Dcop, SymmetricConstraint


class UnsoundPenaltyError(ValueError):
    """Penalty too small to keep the optimum mirror-consistent."""


@dataclass(frozen=True)
class PeavInstance:
    dcop: Dcop
    penalty: float
    original_vars: tuple[int, ...]
    mirrors: dict[tuple[int, int], int]
    """``(holder agent, original variable) -> PEAV variable``."""

    def lift(self, a: Sequence[int]) -> Assignment:
        """Mirror-consistent PEAV assignment representing original ``a``."""
        out = [0] * self.dcop.n_vars
        for var, pv in enumerate(self.original_vars):
            out[pv] = a[var]
        for (_, var), pv in self.mirrors.items():
            out[pv] = a[var]
        return tuple(out)

    def project(self, pa: Sequence[int]) -> Assignment:
        return tuple(pa[pv] for pv in self.original_vars)

    def is_consistent(self, pa: Sequence[int]) -> bool:
        return all(pa[pv] == pa[self.original_vars[var]] for (_, var), pv in self.mirrors.items())

    def consistent_assignments(self):
        import itertools

        sizes = [self.dcop.domain_sizes[pv] for pv in self.original_vars]
        for a in itertools.product(*(range(k) for k in sizes)):
            yield self.lift(a)


@dataclass(frozen=True)
class PeavSizeReport:
    variable_count: int
    constraint_count: int
    density: float


def default_penalty(instance: AdcopInstance):
    return 1 + instance.max_side_total()


def _equality_table(k: int, penalty) -> np.ndarray:
    table = np.full((k, k), penalty)
    np.fill_diagonal(table, 0)
    return table


def to_peav(instance: AdcopInstance, penalty=None) -> PeavInstance:
    """PEAV reformulation with one mirror per (agent, neighbour variable).

    Variables are laid out as each original followed by its mirrors, so
    sequential search binds every mirror right after its original.
    """
    if not instance.is_binary and any(c.arity > 2 for c in instance.constraints):
        raise ValueError("PEAV is defined here for unary and binary constraints only")
    bound = instance.max_side_total()
    if penalty is None:
        penalty = bound + 1
    elif penalty <= bound:
        raise UnsoundPenaltyError(f"penalty {penalty} must exceed the sum of maximal side costs {bound}")

    holders: dict[int, list[int]] = {v: [] for v in range(instance.n_vars)}
    for c in instance.constraints:
        if c.arity == 2:
            u, w = c.scope
            holders[w].append(instance.owners[u])
            holders[u].append(instance.owners[w])

    sizes: list[int] = []
    owners: list[int] = []
    names: list[str] = []
    original_vars: list[int] = []
    mirrors: dict[tuple[int, int], int] = {}
    for var in range(instance.n_vars):
        original_vars.append(len(sizes))
        sizes.append(instance.domain_sizes[var])
        owners.append(instance.owners[var])
        names.append(f"x{var + 1}")
        for holder in sorted(set(holders[var])):
            mirrors[(holder, var)] = len(sizes)
            sizes.append(instance.domain_sizes[var])
            owners.append(holder)
            names.append(f"x{var + 1}^{holder}")

    constraints: list[tuple[tuple[int, ...], np.ndarray]] = []
    for c in instance.constraints:
        if c.arity == 1:
            constraints.append(((original_vars[c.scope[0]],), sum(c.sides[1:], c.sides[0])))
            continue
        u, w = c.scope
        au, aw = instance.owners[u], instance.owners[w]
        # each agent prices its side against its own mirror of the other variable
        constraints.append(((original_vars[u], mirrors[(au, w)]), c.sides[0]))
        constraints.append(((mirrors[(aw, u)], original_vars[w]), c.sides[1]))
    for (holder, var), pv in mirrors.items():
        constraints.append(((original_vars[var], pv), _equality_table(instance.domain_sizes[var], penalty)))

    dcop = Dcop.build(sizes, constraints, owners, names)
    return PeavInstance(dcop, penalty, tuple(original_vars), mirrors)


def peav_size(instance: AdcopInstance) -> PeavSizeReport:
    """Size of the PEAV reformulation without building it."""
    binary = sum(1 for c in instance.constraints if c.arity == 2)
    unary = sum(1 for c in instance.constraints if c.arity == 1)
    variables = instance.n_vars + 2 * binary
    constraints = 4 * binary + unary
    pairs = variables * (variables - 1) / 2
    density = (4 * binary) / pairs if pairs else 0.0
    return PeavSizeReport(variables, constraints, density)


def aggregate_symmetric(instance: AdcopInstance) -> Dcop:
    """One table per constraint: the pointwise sum of its sides."""
    constraints = [(c.scope, sum(c.sides[1:], c.sides[0])) for c in instance.constraints]
    return Dcop.build(instance.domain_sizes, constraints, instance.owners)


def unary_decomposition_exists(c: AsymmetricConstraint) -> bool:
    """Whether unary costs plus one shared binary table reproduce both sides.

    ``U_i(a) + B(a, b) = S_i(a, b)`` and ``U_j(b) + B(a, b) = S_j(a, b)``
    is solvable iff ``S_i - S_j`` separates as ``f(a) - g(b)``, i.e. all its
    2x2 interaction contrasts vanish.
    """
    if c.arity != 2:
        raise ValueError("binary constraint required")
    diff = c.sides[0].astype(np.float64) - c.sides[1].astype(np.float64)
    contrast = diff - diff[:, :1] - diff[:1, :] + diff[0, 0]
    return bool(np.allclose(contrast, 0.0, atol=1e-9))
