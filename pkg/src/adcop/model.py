"""Asymmetric and symmetric DCOP data model.

Variables are addressed by 0-based position; agents by 1-based id. An
:class:`AdcopInstance` keeps one cost table per involved agent for every
constraint, while a :class:`Dcop` keeps a single shared table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

Assignment = tuple[int, ...]
"""Full assignment: one value index per variable, in variable order."""


class DomainError(ValueError):
    """A value index lies outside its variable's domain."""


class UnknownAgentError(KeyError):
    """An agent id that the instance does not declare."""


@dataclass(frozen=True)
class Domain:
    values: tuple

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ValueError("domain must be nonempty")
        if len(set(self.values)) != len(self.values):
            raise ValueError("domain values must be distinct")

    @classmethod
    def of_size(cls, k: int) -> "Domain":
        return cls(tuple(range(k)))

    def __len__(self) -> int:
        return len(self.values)

    def index(self, value) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise DomainError(f"{value!r} not in domain {self.values}") from None


def _as_cost_table(table, shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(table)
    if arr.shape != shape:
        raise ValueError(f"cost table has shape {arr.shape}, expected {shape}")
    if arr.dtype.kind in "iub":
        arr = arr.astype(np.int64)
    elif np.all(np.equal(np.mod(arr, 1), 0)):
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(np.float64)
    if (arr < 0).any():
        raise ValueError("costs must be non-negative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AsymmetricConstraint:
    """A constraint with one cost table per scope variable's owner.

    Every side is indexed in scope order, so for a binary constraint
    ``sides[1][a, b]`` is the second agent's cost when the first scope
    variable takes ``a`` and the second takes ``b``.
    """

    scope: tuple[int, ...]
    sides: tuple[np.ndarray, ...]

    @property
    def arity(self) -> int:
        return len(self.scope)

    def side_view(self, position: int) -> np.ndarray:
        """Side ``position`` with that side's own variable on axis 0 (binary only)."""
        table = self.sides[position]
        return table if position == 0 else table.T


@dataclass(frozen=True, eq=False)
class SymmetricConstraint:
    scope: tuple[int, ...]
    table: np.ndarray

    @property
    def arity(self) -> int:
        return len(self.scope)


def _check_assignment(domains: Sequence[Domain], a: Sequence[int]) -> None:
    if len(a) != len(domains):
        raise ValueError(f"assignment covers {len(a)} variables, expected {len(domains)}")
    for var, (value, dom) in enumerate(zip(a, domains)):
        if not 0 <= value < len(dom):
            raise DomainError(f"variable {var}: value index {value} outside domain of size {len(dom)}")


class _Problem:
    """Shared behaviour for both instance kinds."""

    domains: tuple[Domain, ...]
    owners: tuple[int, ...]

    @property
    def n_vars(self) -> int:
        return len(self.domains)

    @property
    def n_agents(self) -> int:
        return max(self.owners, default=0)

    @property
    def agents(self) -> range:
        return range(1, self.n_agents + 1)

    @cached_property
    def domain_sizes(self) -> tuple[int, ...]:
        return tuple(len(d) for d in self.domains)

    def variables_of(self, agent: int) -> list[int]:
        if agent not in self.agents:
            raise UnknownAgentError(agent)
        return [v for v, owner in enumerate(self.owners) if owner == agent]

    def assignments(self) -> Iterator[Assignment]:
        """All full assignments in lexicographic order."""
        return itertools.product(*(range(k) for k in self.domain_sizes))

    def search_space_size(self) -> int:
        return int(np.prod(self.domain_sizes, dtype=object))

    def assignment_from_labels(self, labels: Mapping[int, object] | Sequence) -> Assignment:
        if isinstance(labels, Mapping):
            labels = [labels[v] for v in range(self.n_vars)]
        return tuple(dom.index(value) for dom, value in zip(self.domains, labels))

    def evaluate(self, a: Sequence[int]):  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AdcopInstance(_Problem):
    """Agents, variables, domains and asymmetric constraints."""

    domains: tuple[Domain, ...]
    owners: tuple[int, ...]
    constraints: tuple[AsymmetricConstraint, ...]
    cost_alphabet: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if len(self.owners) != len(self.domains):
            raise ValueError("every variable needs exactly one owner")
        if self.owners and sorted(set(self.owners)) != list(range(1, max(self.owners) + 1)):
            raise ValueError("agent ids must be contiguous from 1")
        pairs = set()
        for c in self.constraints:
            if any(not 0 <= v < len(self.domains) for v in c.scope):
                raise ValueError(f"constraint scope {c.scope} references undeclared variables")
            agents = [self.owners[v] for v in c.scope]
            if len(set(agents)) != len(agents):
                raise ValueError("a constraint may involve each agent only once")
            if len(c.sides) != len(c.scope):
                raise ValueError("need one side per scope agent")
            if c.arity == 2:
                key = frozenset(agents)
                if key in pairs:
                    raise ValueError(f"agents {sorted(key)} share more than one binary constraint")
                pairs.add(key)
        if not self.cost_alphabet:
            alphabet = set()
            for c in self.constraints:
                for s in c.sides:
                    alphabet.update(np.unique(s).tolist())
            object.__setattr__(self, "cost_alphabet", frozenset(alphabet or {0}))

    @classmethod
    def build(
        cls,
        domain_sizes: Sequence[int],
        constraints: Iterable[tuple[Sequence[int], Sequence]],
        owners: Sequence[int] | None = None,
        cost_alphabet: Iterable | None = None,
    ) -> "AdcopInstance":
        """Build from plain tables: ``constraints`` yields ``(scope, sides)``."""
        domains = tuple(Domain.of_size(k) for k in domain_sizes)
        owners = tuple(owners) if owners is not None else tuple(range(1, len(domains) + 1))
        built = []
        for scope, sides in constraints:
            scope = tuple(scope)
            if any(not 0 <= v < len(domains) for v in scope):
                raise ValueError(f"constraint scope {scope} references undeclared variables")
            shape = tuple(len(domains[v]) for v in scope)
            built.append(AsymmetricConstraint(scope, tuple(_as_cost_table(s, shape) for s in sides)))
        return cls(domains, owners, tuple(built), frozenset(cost_alphabet or ()))

    def evaluate(self, a: Sequence[int]):
        return evaluate_global(self, a)

    @cached_property
    def is_binary(self) -> bool:
        return all(c.arity == 2 for c in self.constraints)

    @cached_property
    def one_variable_per_agent(self) -> bool:
        return list(self.owners) == list(range(1, len(self.owners) + 1))

    def side_position(self, c: AsymmetricConstraint, agent: int) -> int:
        for pos, v in enumerate(c.scope):
            if self.owners[v] == agent:
                return pos
        raise UnknownAgentError(agent)

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Agent pairs ``(i, j)`` with ``i < j`` of every binary constraint."""
        out = []
        for c in self.constraints:
            if c.arity == 2:
                i, j = sorted(self.owners[v] for v in c.scope)
                out.append((i, j))
        return out

    @cached_property
    def views(self) -> dict[int, dict[int, np.ndarray]]:
        """Per agent, per neighbour: own side table oriented ``[own value, their value]``.

        Requires a binary instance with one variable per agent.
        """
        require_binary_single(self)
        out: dict[int, dict[int, np.ndarray]] = {i: {} for i in self.agents}
        for c in self.constraints:
            if c.arity != 2:
                continue
            a, b = (self.owners[v] for v in c.scope)
            out[a][b] = c.side_view(0)
            out[b][a] = c.side_view(1)
        return out

    @cached_property
    def constraint_index(self) -> dict[tuple[int, int], int]:
        """Constraint position keyed by ordered agent pair (both orders present)."""
        out = {}
        for idx, c in enumerate(self.constraints):
            if c.arity == 2:
                a, b = (self.owners[v] for v in c.scope)
                out[(a, b)] = out[(b, a)] = idx
        return out

    def max_side_total(self):
        return sum(s.max() for c in self.constraints for s in c.sides)


@dataclass(frozen=True, eq=False)
class Dcop(_Problem):
    """Symmetric DCOP: one shared cost table per constraint."""

    domains: tuple[Domain, ...]
    owners: tuple[int, ...]
    constraints: tuple[SymmetricConstraint, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.owners) != len(self.domains):
            raise ValueError("every variable needs exactly one owner")
        for c in self.constraints:
            if any(not 0 <= v < len(self.domains) for v in c.scope):
                raise ValueError(f"constraint scope {c.scope} references undeclared variables")

    @classmethod
    def build(cls, domain_sizes, constraints, owners=None, names=()) -> "Dcop":
        domains = tuple(Domain.of_size(k) for k in domain_sizes)
        owners = tuple(owners) if owners is not None else tuple(range(1, len(domains) + 1))
        built = []
        for scope, table in constraints:
            scope = tuple(scope)
            if any(not 0 <= v < len(domains) for v in scope):
                raise ValueError(f"constraint scope {scope} references undeclared variables")
            built.append(SymmetricConstraint(scope, _as_cost_table(table, tuple(len(domains[v]) for v in scope))))
        return cls(domains, owners, tuple(built), tuple(names))

    def evaluate(self, a: Sequence[int]):
        _check_assignment(self.domains, a)
        return sum((c.table[tuple(a[v] for v in c.scope)] for c in self.constraints), 0)

    @cached_property
    def var_constraints(self) -> list[list[SymmetricConstraint]]:
        out: list[list[SymmetricConstraint]] = [[] for _ in self.domains]
        for c in self.constraints:
            for v in set(c.scope):
                out[v].append(c)
        return out


Problem = Union[AdcopInstance, Dcop]


def require_binary_single(instance: AdcopInstance) -> None:
    """Unary and binary constraints only, agent ``i`` owning variable ``i - 1``."""
    if any(c.arity > 2 for c in instance.constraints):
        raise ValueError("solver supports unary and binary constraints only")
    if not instance.one_variable_per_agent:
        raise ValueError("solver requires exactly one variable per agent, agent i owning variable i-1")


def evaluate_global(instance: AdcopInstance, a: Sequence[int]):
    """Sum over constraints of the sum of all sides under ``a``."""
    _check_assignment(instance.domains, a)
    total = 0
    for c in instance.constraints:
        idx = tuple(a[v] for v in c.scope)
        for side in c.sides:
            total += side[idx]
    return total


def evaluate_agent(instance: AdcopInstance, agent: int, a: Sequence[int]):
    """Sum of ``agent``'s sides over the constraints it takes part in."""
    if agent not in instance.agents:
        raise UnknownAgentError(agent)
    _check_assignment(instance.domains, a)
    total = 0
    for c in instance.constraints:
        for pos, v in enumerate(c.scope):
            if instance.owners[v] == agent:
                total += c.sides[pos][tuple(a[u] for u in c.scope)]
    return total


class IncompleteScopeError(ValueError):
    """A partial assignment misses a variable the constraint needs."""


def side_cost(instance: AdcopInstance, c: AsymmetricConstraint, side_agent: int, pa: Mapping[int, int]):
    """Entry of ``side_agent``'s table at the scope values taken from ``pa``.

    ``pa`` maps variable index to value index and may hold extra variables.
    """
    missing = [v for v in c.scope if v not in pa]
    if missing:
        raise IncompleteScopeError(f"partial assignment lacks variables {missing}")
    pos = instance.side_position(c, side_agent)
    return c.sides[pos][tuple(pa[v] for v in c.scope)]


def neighbors(instance: Problem, agent: int) -> set[int]:
    if agent not in instance.agents:
        raise UnknownAgentError(agent)
    out = set()
    for c in instance.constraints:
        owners = {instance.owners[v] for v in c.scope}
        if agent in owners:
            out |= owners
    out.discard(agent)
    return out


def single_moves(instance: Problem, a: Sequence[int]) -> Iterator[tuple[int, int, Assignment]]:
    """Yield ``(variable, value, moved assignment)`` for every single-variable change."""
    a = tuple(a)
    for var, k in enumerate(instance.domain_sizes):
        for value in range(k):
            if value != a[var]:
                yield var, value, a[:var] + (value,) + a[var + 1:]


def is_local_optimum(instance: Problem, a: Sequence[int]) -> bool:
    """True iff no single-variable change strictly lowers the global cost."""
    base = instance.evaluate(a)
    return all(instance.evaluate(b) >= base for _, _, b in single_moves(instance, a))


def is_nash_stable(instance: AdcopInstance, a: Sequence[int]) -> bool:
    """True iff no agent can strictly lower its own cost by changing one of its variables."""
    a = tuple(a)
    own = {agent: evaluate_agent(instance, agent, a) for agent in instance.agents}
    for var, _, b in single_moves(instance, a):
        mover = instance.owners[var]
        if evaluate_agent(instance, mover, b) < own[mover]:
            return False
    return True
