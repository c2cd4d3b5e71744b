"""Synchronous local search on binary ADCOPs."""

from .acls import Acls, acls
from .common import LocalSearch, run_local
from .dsa import Dsa, dsa
from .maxsum import MaxSum, max_sum
from .mcs import TransferMgm, gca_mgm, mcs_mgm
from .mgm import Mgm, mgm
from .mgm2 import Mgm2, mgm2

__all__ = [
    "Acls",
    "Dsa",
    "LocalSearch",
    "MaxSum",
    "Mgm",
    "Mgm2",
    "TransferMgm",
    "acls",
    "dsa",
    "gca_mgm",
    "max_sum",
    "mcs_mgm",
    "mgm",
    "mgm2",
    "run_local",
]
