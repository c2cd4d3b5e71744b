"""Complete solvers: the brute-force oracle and the branch-and-bound protocols."""

from .bounding import afb, atwb, build_h2
from .bruteforce import DEFAULT_CAP, SearchSpaceTooLarge, brute_force_optimal, cost_tensor
from .sync import OneSidedResult, one_sided_sync_bb, sync_abb, sync_abb_2ph, sync_bb

__all__ = [
    "DEFAULT_CAP",
    "OneSidedResult",
    "SearchSpaceTooLarge",
    "afb",
    "atwb",
    "brute_force_optimal",
    "build_h2",
    "cost_tensor",
    "one_sided_sync_bb",
    "sync_abb",
    "sync_abb_2ph",
    "sync_bb",
]
