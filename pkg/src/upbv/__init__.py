"""Construction and verification of strongly nonlocal UPBs in d x d x d."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConsistencyError, DomainError, PreconditionError, ResourceError, RuleNotApplicable
from .linalg import DEFAULT_TOL, SolutionSpace, Tolerances
from .states import ProductState, StateSet
from .families import (
    FamilyId,
    build_family,
    complement_phi_3,
    cyclic_shift,
    expected_size,
    tiles_34,
    upb_333,
    upb_444,
    upb_ddd,
)
from .unextend import UpbStatus, UpbVerdict, find_extension, is_upb
from .opm import MeasuredSubset, Verdict, VerdictKind, is_trivial_opm, solution_space, strongest_nonlocality
from .lemmas import Certificate, Knowledge, certify, check_layer_overlaps, lemma1_oracle, lemma2_oracle
from .entangle import DensityMatrix, ppt_report, range_entanglement_certificate, schmidt_rank, upb_mixed_state

__all__ = [
    "__version__",
    "ConsistencyError", "DomainError", "PreconditionError", "ResourceError", "RuleNotApplicable",
    "DEFAULT_TOL", "SolutionSpace", "Tolerances",
    "ProductState", "StateSet",
    "FamilyId", "build_family", "complement_phi_3", "cyclic_shift", "expected_size",
    "tiles_34", "upb_333", "upb_444", "upb_ddd",
    "UpbStatus", "UpbVerdict", "find_extension", "is_upb",
    "MeasuredSubset", "Verdict", "VerdictKind", "is_trivial_opm", "solution_space", "strongest_nonlocality",
    "Certificate", "Knowledge", "certify", "check_layer_overlaps", "lemma1_oracle", "lemma2_oracle",
    "DensityMatrix", "ppt_report", "range_entanglement_certificate", "schmidt_rank", "upb_mixed_state",
]  # fmt: skip
