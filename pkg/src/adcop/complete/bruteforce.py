from __future__ import annotations

import numpy as np

from ..model import AdcopInstance, Assignment, Dcop, Problem

DEFAULT_CAP = 10**7


class SearchSpaceTooLarge(RuntimeError):
    pass


def cost_tensor(instance: Problem) -> np.ndarray:
    """Global cost of every full assignment, one axis per variable."""
    shape = instance.domain_sizes
    total = np.zeros(shape, dtype=np.float64 if _has_float(instance) else np.int64)
    for c in instance.constraints:
        tables = [c.table] if isinstance(instance, Dcop) else list(c.sides)
        for table in tables:
            # broadcast the table onto its scope axes; scopes are variable-distinct
            order = np.argsort(c.scope)
            t = np.transpose(table, order)
            idx = [1] * len(shape)
            for v in c.scope:
                idx[v] = shape[v]
            total = total + t.reshape(idx)
    return total


def _has_float(instance: Problem) -> bool:
    for c in instance.constraints:
        tables = [c.table] if isinstance(instance, Dcop) else c.sides
        if any(t.dtype.kind == "f" for t in tables):
            return True
    return False


def brute_force_optimal(instance: Problem, cap: int = DEFAULT_CAP) -> tuple[Assignment, object]:
    """Exhaustive minimum; ties go to the lexicographically first assignment."""
    size = instance.search_space_size()
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} assignments exceed the oracle cap of {cap}")
    if instance.n_vars == 0:
        return (), 0
    costs = cost_tensor(instance)
    flat = int(np.argmin(costs))
    best = tuple(int(x) for x in np.unravel_index(flat, costs.shape))
    return best, costs[best].item()
