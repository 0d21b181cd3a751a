"""The mixed state supported on the complement of a UPB, and its PPT checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .linalg import DEFAULT_TOL, Tolerances, eig_hermitian, partial_transpose, rank
from .states import PARTY_NAMES, StateSet
from .unextend import UpbStatus, UpbVerdict, is_upb, orthogonality_defects

__all__ = [
    "DensityMatrix",
    "RangeCertificate",
    "NORMALIZATION_NOTE",
    "span_projector",
    "upb_mixed_state",
    "bipartitions",
    "cut_label",
    "ppt_report",
    "range_entanglement_certificate",
    "schmidt_rank",
]

NORMALIZATION_NOTE = (
    "rho = (I - P)/(D - t): trace(I - P) = D - t, so this is the prefactor that gives trace one"
)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray
    note: str = ""

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        mat = np.asarray(self.matrix, dtype=complex)
        total = math.prod(dims)
        if mat.shape != (total, total):
            raise DomainError(f"matrix shape {mat.shape} does not match dims {dims}")
        if np.abs(mat - mat.conj().T).max(initial=0.0) > 1e-10:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1) > 1e-10:
            raise DomainError(f"trace is {np.trace(mat).real:.12g}, not 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)
        if self.spectrum()[0] < -1e-10:
            raise DomainError("density matrix has a negative eigenvalue")

    def spectrum(self) -> np.ndarray:
        return eig_hermitian(self.matrix)

    def rank(self, tol: float = DEFAULT_TOL.rank) -> int:
        return rank(self.matrix, tol)

    def partial_transpose(self, parties: Sequence[int]) -> np.ndarray:
        return partial_transpose(self.matrix, self.dims, parties)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        total = math.prod(dims)
        return cls(tuple(dims), np.eye(total) / total)


def span_projector(s: StateSet, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of a pairwise orthogonal set."""
    bad = orthogonality_defects(s, tol.zero)
    if bad:
        i, j, v = bad[0]
        raise PreconditionError(f"{s[i].label!r} and {s[j].label!r} are not orthogonal (|overlap| {v:.3g})")
    if len(s) == 0:
        return np.zeros((s.total_dim, s.total_dim), dtype=complex)
    v = s.vectors()
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return v.T @ v.conj()


def upb_mixed_state(s: StateSet, validate: bool = True, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """``(I - P)/(D - t)`` for the span projector ``P`` of a UPB.

    With ``validate`` the UPB property is checked here; otherwise the caller
    vouches for it.
    """
    if validate:
        verdict = is_upb(s, tol)
        if verdict.status is not UpbStatus.UPB:
            raise PreconditionError(f"{s.name or 'set'} is not a UPB ({verdict.status.value})")
    p = span_projector(s, tol)
    total = s.total_dim
    if len(s) >= total:
        raise PreconditionError("the set spans the whole space; its complement is empty")
    rho = (np.eye(total) - p) / (total - len(s))
    return DensityMatrix(s.dims, rho, NORMALIZATION_NOTE)


def bipartitions(nparties: int) -> list[tuple[int, ...]]:
    """The smaller side of each bipartition (for three parties: A, B, C).

    Equal halves are represented by the side holding party 0.
    """
    out = []
    for size in range(1, nparties // 2 + 1):
        for side in itertools.combinations(range(nparties), size):
            if 2 * size < nparties or 0 in side:
                out.append(side)
    return out


def cut_label(side: Sequence[int], nparties: int) -> str:
    """``A|BC`` style label, the far side listed cyclically after ``side``."""
    side = sorted(side)
    start = side[-1]
    rest = [(start + k) % nparties for k in range(1, nparties)]
    rest = [p for p in rest if p not in side]
    return "".join(PARTY_NAMES[p] for p in side) + "|" + "".join(PARTY_NAMES[p] for p in rest)


def ppt_report(rho: DensityMatrix) -> dict[str, float]:
    """Smallest eigenvalue of the partial transpose for each bipartition."""
    n = len(rho.dims)
    out = {}
    for side in bipartitions(n):
        out[cut_label(side, n)] = float(eig_hermitian(rho.partial_transpose(side))[0])
    return out


@dataclass(frozen=True)
class RangeCertificate:
    certified: bool
    verdict: UpbVerdict
    statement: str


def range_entanglement_certificate(s: StateSet, tol: Tolerances = DEFAULT_TOL) -> RangeCertificate:
    """Full-separability refutation for ``(I - P)/(D - t)`` via the range criterion."""
    verdict = is_upb(s, tol)
    if verdict.status is UpbStatus.UPB:
        msg = (
            "the complement of span(set) contains no product vector, so the range of rho "
            "contains no product vector and rho is not fully separable; separability across "
            "individual bipartitions is not decided by this check"
        )
        return RangeCertificate(True, verdict, msg)
    if verdict.status is UpbStatus.EXTENDIBLE:
        msg = "refused: a product vector lies in the complement of span(set)"
    else:
        msg = "refused: " + ("; ".join(verdict.diagnostics) or "invalid input")
    return RangeCertificate(False, verdict, msg)


def schmidt_rank(v: np.ndarray, dims: Sequence[int], cut: Sequence[int], tol: float = DEFAULT_TOL.rank) -> int:
    """Rank of ``v`` reshaped as a matrix between ``cut`` and the other parties."""
    v = np.asarray(v, dtype=complex).ravel()
    dims = [int(d) for d in dims]
    if v.size != math.prod(dims):
        raise DomainError(f"vector length {v.size} does not match dims {dims}")
    if not np.any(v):
        raise DomainError("schmidt_rank of the zero vector")
    side = sorted({int(p) for p in cut})
    n = len(dims)
    if not side or len(side) >= n or side[0] < 0 or side[-1] >= n:
        raise DomainError(f"cut {cut!r} is not a proper nonempty subset of {n} parties")
    rest = [p for p in range(n) if p not in side]
    t = v.reshape(dims).transpose(side + rest)
    rows = math.prod(dims[p] for p in side)
    return rank(t.reshape(rows, -1), tol)
