"""Orthogonality-preserving measurements on a coalition of parties.

A POVM element ``E`` acting on the measured parties keeps the post-measurement
states orthogonal iff ``<x_Y|E|y_Y> = 0`` for every pair of members whose
unmeasured factors overlap.  These conditions are linear in the Hermitian
parameters of ``E``; the set admits only trivial such measurements iff the
solution space is one-dimensional (the identity).  Positivity need not be
imposed: if a non-identity Hermitian ``X`` solves the system, so does the
positive operator ``I + eps X`` for small ``eps``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import ConsistencyError, DomainError, PreconditionError
from .families import cyclic_shift, same_ray_set
from .linalg import (
    DEFAULT_TOL,
    SolutionSpace,
    Tolerances,
    hermitian_param_rows,
    identity_params,
    kron,
    nullspace_real,
    r_factor,
)
from .states import PARTY_NAMES, StateSet
from .unextend import orthogonality_defects

__all__ = [
    "MeasuredSubset",
    "ConstraintSystem",
    "VerdictKind",
    "Verdict",
    "NonlocalityReport",
    "coalitions",
    "active_pairs",
    "build_constraints",
    "solution_space",
    "is_trivial_opm",
    "strongest_nonlocality",
    "cyclic_invariant",
]

_PAIRS_PER_CHUNK = 1500


@dataclass(frozen=True)
class MeasuredSubset:
    parties: tuple[int, ...]
    m: int
    name: str = ""

    @classmethod
    def of(cls, parties, dims: Sequence[int]) -> "MeasuredSubset":
        """Build from party indices or letters (``"BC"``, ``(1, 2)``)."""
        if isinstance(parties, str):
            try:
                idx = [PARTY_NAMES.index(ch) for ch in parties.upper()]
            except ValueError:
                raise DomainError(f"unknown party letters in {parties!r}") from None
            name = parties.upper()
        else:
            idx = [int(p) for p in parties]
            name = "".join(PARTY_NAMES[p] for p in idx) if all(0 <= p < len(PARTY_NAMES) for p in idx) else ""
        uniq = sorted(set(idx))
        n = len(dims)
        if len(uniq) != len(idx) or not uniq or len(uniq) >= n or uniq[0] < 0 or uniq[-1] >= n:
            raise DomainError(f"measured parties {parties!r} must be a nonempty proper subset of {n} parties")
        return cls(tuple(uniq), math.prod(dims[p] for p in uniq), name)


def coalitions(nparties: int, dims: Sequence[int]) -> list[MeasuredSubset]:
    """All parties but one, for each omitted party in turn: BC, CA, AB for three."""
    out = []
    for omit in range(nparties):
        members = [(omit + k) % nparties for k in range(1, nparties)]
        out.append(MeasuredSubset.of(members, dims))
    return out


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Zero conditions ``<x|E|y> = 0``, one per active pair.

    Measured parts are stored once per distinct ray in ``vectors`` (unit
    norm); each condition points into it with ``left_ids`` / ``right_ids``.
    """

    m: int
    vectors: np.ndarray
    left_ids: np.ndarray
    right_ids: np.ndarray
    provenance: list[tuple[str, str, complex]]
    measured: MeasuredSubset | None = None

    def __len__(self) -> int:
        return len(self.left_ids)

    @property
    def left(self) -> np.ndarray:
        return self.vectors[self.left_ids]

    @property
    def right(self) -> np.ndarray:
        return self.vectors[self.right_ids]

    @property
    def rows(self) -> np.ndarray:
        """Dense real rows, two per condition (real part, imaginary part)."""
        if len(self) == 0:
            return np.zeros((0, self.m * self.m))
        return hermitian_param_rows(self.left, self.right)

    def unique_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct unordered ray pairs; ``(x, y)`` and ``(y, x)`` span the same rows."""
        if len(self) == 0:
            return self.left_ids, self.right_ids
        a = np.minimum(self.left_ids, self.right_ids)
        b = np.maximum(self.left_ids, self.right_ids)
        keys = np.unique(np.stack([a, b], axis=1), axis=0)
        return keys[:, 0], keys[:, 1]

    def row_chunks(self, pairs_per_chunk: int = _PAIRS_PER_CHUNK) -> Iterator[np.ndarray]:
        li, ri = self.unique_pairs()
        for start in range(0, len(li), pairs_per_chunk):
            sl = slice(start, start + pairs_per_chunk)
            yield hermitian_param_rows(self.vectors[li[sl]], self.vectors[ri[sl]])


class VerdictKind(str, Enum):
    TRIVIAL = "TRIVIAL"
    NONTRIVIAL = "NONTRIVIAL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: VerdictKind
    dim: int
    gap_ratio: float
    space: SolutionSpace
    measured: MeasuredSubset | None = None
    provenance: str = "computed"
    seconds: float = 0.0

    @property
    def basis(self) -> np.ndarray:
        return self.space.basis


@dataclass(frozen=True, eq=False)
class NonlocalityReport:
    verdicts: dict[str, Verdict]
    provenance: dict[str, str] = field(default_factory=dict)

    @property
    def overall(self) -> VerdictKind:
        kinds = {v.kind for v in self.verdicts.values()}
        if kinds == {VerdictKind.TRIVIAL}:
            return VerdictKind.TRIVIAL
        if VerdictKind.INCONCLUSIVE in kinds and VerdictKind.NONTRIVIAL not in kinds:
            return VerdictKind.INCONCLUSIVE
        return VerdictKind.NONTRIVIAL

    @property
    def dims(self) -> dict[str, int]:
        return {k: v.dim for k, v in self.verdicts.items()}


def _require_orthogonal(s: StateSet, tol: Tolerances) -> None:
    bad = orthogonality_defects(s, tol.zero)
    if bad:
        i, j, v = bad[0]
        raise PreconditionError(f"set is not orthogonal: {s[i].label!r} vs {s[j].label!r} (|overlap| {v:.3g})")


def _unmeasured_overlaps(s: StateSet, measured: MeasuredSubset) -> tuple[np.ndarray, np.ndarray]:
    n = len(s)
    ov = np.ones((n, n), dtype=complex)
    scale = np.ones((n, n))
    for p, g in enumerate(s.party_grams()):
        if p in measured.parties:
            continue
        norms = np.sqrt(np.real(np.diag(g)))
        ov = ov * g
        scale = scale * np.outer(norms, norms)
    return ov, scale


def active_pairs(
    s: StateSet, measured: MeasuredSubset, tol: Tolerances = DEFAULT_TOL
) -> list[tuple[tuple[int, int], complex]]:
    """Unordered pairs whose unmeasured factors have nonzero overlap."""
    _require_orthogonal(s, tol)
    ov, scale = _unmeasured_overlaps(s, measured)
    hit = np.abs(ov) > tol.zero * scale
    ii, jj = np.nonzero(np.triu(hit, 1))
    return [((int(i), int(j)), complex(ov[i, j])) for i, j in zip(ii, jj)]


def _measured_vectors(s: StateSet, measured: MeasuredSubset) -> np.ndarray:
    vecs = np.stack([kron([st.factors[p] for p in measured.parties]) for st in s])
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def _dedupe_rays(vecs: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Representatives of distinct rays and the index map into them."""
    g = np.abs(vecs.conj() @ vecs.T)
    ids = np.full(len(vecs), -1)
    reps: list[int] = []
    for i in range(len(vecs)):
        if ids[i] >= 0:
            continue
        same = (g[i] >= 1 - tol) & (ids < 0)
        ids[same] = len(reps)
        reps.append(i)
    return vecs[reps], ids


def build_constraints(
    s: StateSet, measured: MeasuredSubset, tol: Tolerances = DEFAULT_TOL
) -> ConstraintSystem:
    pairs = active_pairs(s, measured, tol)
    vecs = _measured_vectors(s, measured) if len(s) else np.zeros((0, measured.m), dtype=complex)
    reps, ids = _dedupe_rays(vecs, tol.zero) if len(s) else (vecs, np.zeros(0, dtype=int))
    li = np.array([ids[i] for (i, _), _ in pairs], dtype=int)
    ri = np.array([ids[j] for (_, j), _ in pairs], dtype=int)
    prov = [(s[i].label, s[j].label, ov) for (i, j), ov in pairs]
    return ConstraintSystem(measured.m, reps, li, ri, prov, measured)


def solution_space(cs: ConstraintSystem, tol: Tolerances = DEFAULT_TOL) -> SolutionSpace:
    """Hermitian solutions of the system, with a gap-ratio confidence."""
    ncols = cs.m * cs.m
    r = r_factor(cs.row_chunks(), ncols)
    basis, gap = nullspace_real(r, tol.rank)
    ident = identity_params(cs.m) / math.sqrt(cs.m)
    if basis.shape[0] == 0 or np.linalg.norm(ident - basis.T @ (basis @ ident)) > 1e-8:
        raise ConsistencyError(
            "identity is not in the computed solution space; the rank tolerance is too loose "
            "or the input is not orthogonal"
        )
    return SolutionSpace(basis.shape[0], basis, gap)


def _is_identity_direction(vec: np.ndarray, m: int) -> bool:
    ident = identity_params(m) / math.sqrt(m)
    return abs(abs(float(vec @ ident)) - 1.0) <= 1e-8


def _verdict(space: SolutionSpace, measured: MeasuredSubset | None, tol: Tolerances, secs: float) -> Verdict:
    if space.gap_ratio < tol.gap_min:
        kind = VerdictKind.INCONCLUSIVE
    elif space.dim == 1:
        m = math.isqrt(space.basis.shape[1])
        if not _is_identity_direction(space.basis[0], m):
            raise ConsistencyError("one-dimensional solution space is not spanned by the identity")
        kind = VerdictKind.TRIVIAL
    else:
        kind = VerdictKind.NONTRIVIAL
    return Verdict(kind, space.dim, space.gap_ratio, space, measured, "computed", secs)


def is_trivial_opm(s: StateSet, measured, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Decide whether the coalition can only measure trivially."""
    if not isinstance(measured, MeasuredSubset):
        measured = MeasuredSubset.of(measured, s.dims)
    t0 = time.perf_counter()
    space = solution_space(build_constraints(s, measured, tol), tol)
    return _verdict(space, measured, tol, time.perf_counter() - t0)


def cyclic_invariant(s: StateSet) -> bool:
    """True iff ``(a, b, c) -> (b, c, a)`` maps the set of rays onto itself."""
    if s.nparties != 3 or len(set(s.dims)) != 1:
        return False
    return same_ray_set(s, cyclic_shift(s))


def strongest_nonlocality(
    s: StateSet, use_symmetry: bool = False, tol: Tolerances = DEFAULT_TOL
) -> NonlocalityReport:
    """Verdicts for the three two-party coalitions BC, CA, AB.

    With ``use_symmetry`` and a cyclically invariant set only BC is solved;
    any coalition is the image of BC under a cyclic relabeling of parties.
    """
    if s.nparties != 3:
        raise DomainError(f"strongest_nonlocality needs 3 parties, got {s.nparties}")
    cuts = coalitions(3, s.dims)
    verdicts: dict[str, Verdict] = {}
    provenance: dict[str, str] = {}
    if use_symmetry and cyclic_invariant(s):
        first = is_trivial_opm(s, cuts[0], tol)
        verdicts[cuts[0].name] = first
        provenance[cuts[0].name] = "computed"
        for cut in cuts[1:]:
            note = f"inherited from {cuts[0].name} by cyclic invariance"
            verdicts[cut.name] = Verdict(first.kind, first.dim, first.gap_ratio, first.space, cut, note, 0.0)
            provenance[cut.name] = note
    else:
        for cut in cuts:
            verdicts[cut.name] = is_trivial_opm(s, cut, tol)
            provenance[cut.name] = "computed"
    return NonlocalityReport(verdicts, provenance)
