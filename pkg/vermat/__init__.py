# vermat/__init__.py
"""
vermat - verifiable outsourced matrix-vector multiplication
"""

__version__ = "1.0.0"
__author__ = "vermat developers"
__description__ = "Pairing-based verification of outsourced matrix-vector products, with CLI and benchmarks"


from vermat.config import config
from vermat.errors import (ChallengeBindingError, DimensionError, GroupMismatchError, IntegrityError,
                           MalformedError, ParameterError, VermatError)
from vermat.pairing_core import GroupElement, OpCounters, PairingSuite, op_scope, suite_for, suite_real, suite_toy
from vermat.fplinalg import FieldMatrix, FieldVector
from vermat.schemas import PvmatParams, Verdict

from vermat import schemas
from vermat import freivalds
from vermat import fg_baseline
from vermat import spmv_interactive
from vermat import dotprod
from vermat import pvmat
from vermat import smallfield


__all__ = [
    "config",
    "VermatError",
    "ParameterError",
    "DimensionError",
    "GroupMismatchError",
    "ChallengeBindingError",
    "MalformedError",
    "IntegrityError",
    "GroupElement",
    "OpCounters",
    "PairingSuite",
    "op_scope",
    "suite_for",
    "suite_real",
    "suite_toy",
    "FieldMatrix",
    "FieldVector",
    "PvmatParams",
    "Verdict",
    "schemas",
    "freivalds",
    "fg_baseline",
    "spmv_interactive",
    "dotprod",
    "pvmat",
    "smallfield",
]
