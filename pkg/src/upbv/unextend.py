"""Unextendibility of orthogonal product sets.

A product state orthogonal to every member exists iff the members can be
split into one group per party such that each group's local factors fail to
span that party's space.  The search only needs *maximal* non-spanning ray
subsets per party, and a cover of all members by one such subset per party.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConsistencyError, PreconditionError, ResourceError
from .linalg import DEFAULT_TOL, Tolerances, nullspace_complex, rank
from .states import PARTY_NAMES, ProductState, StateSet, product_inner

__all__ = [
    "RayTable",
    "NonSpanningFamily",
    "ExtensionWitness",
    "UpbStatus",
    "UpbVerdict",
    "MAX_RAYS",
    "distinct_rays",
    "maximal_nonspanning",
    "maximal_nonspanning_bruteforce",
    "find_extension",
    "is_upb",
    "orthogonality_defects",
]

MAX_RAYS = 30
_PROPORTIONAL = 1e-9


@dataclass(frozen=True)
class RayTable:
    party: int
    rays: list[np.ndarray]
    assignment: list[int]  # state index -> ray id


@dataclass(frozen=True)
class NonSpanningFamily:
    party: int
    # (ray-id bitset, covered-state bitset), both as Python ints
    subsets: list[tuple[int, int]]

    def ray_sets(self) -> list[frozenset[int]]:
        return [frozenset(_bits(r)) for r, _ in self.subsets]


@dataclass(frozen=True)
class ExtensionWitness:
    factors: tuple[np.ndarray, ...]
    residual: float

    def as_state(self, label: str = "witness") -> ProductState:
        return ProductState(self.factors, label)


class UpbStatus(str, Enum):
    UPB = "UPB"
    EXTENDIBLE = "EXTENDIBLE"
    INVALID = "INVALID"


@dataclass(frozen=True)
class UpbVerdict:
    status: UpbStatus
    witness: ExtensionWitness | None = None
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.status is UpbStatus.UPB


def _bits(x: int):
    i = 0
    while x:
        if x & 1:
            yield i
        x >>= 1
        i += 1


def _proportional(a: np.ndarray, b: np.ndarray) -> bool:
    ov = abs(np.vdot(a, b)) ** 2
    return ov >= (1 - _PROPORTIONAL) * np.vdot(a, a).real * np.vdot(b, b).real


def distinct_rays(s: StateSet, party: int) -> RayTable:
    """Deduplicate one party's local factors up to scalar multiples."""
    rays: list[np.ndarray] = []
    assignment: list[int] = []
    for st in s:
        f = st.factors[party]
        for rid, r in enumerate(rays):
            if _proportional(f, r):
                assignment.append(rid)
                break
        else:
            assignment.append(len(rays))
            rays.append(f)
    return RayTable(party, rays, assignment)


def _covered(table: RayTable, raybits: int) -> int:
    out = 0
    for idx, rid in enumerate(table.assignment):
        if raybits >> rid & 1:
            out |= 1 << idx
    return out


def _check_budget(table: RayTable) -> None:
    if len(table.rays) > MAX_RAYS:
        name = PARTY_NAMES[table.party] if table.party < len(PARTY_NAMES) else str(table.party)
        raise ResourceError(
            f"party {name} has {len(table.rays)} distinct rays, over the budget of {MAX_RAYS}"
        )


def maximal_nonspanning(
    table: RayTable, local_dim: int, tol: Tolerances = DEFAULT_TOL
) -> NonSpanningFamily:
    """All maximal subsets of rays that do not span ``C^local_dim``.

    When the rays span the whole space, a maximal non-spanning subset is
    exactly the set of rays lying in some hyperplane spanned by rays, so the
    enumeration runs over ``(local_dim - 1)``-subsets rather than all subsets.
    """
    _check_budget(table)
    nr = len(table.rays)
    if nr == 0:
        return NonSpanningFamily(table.party, [(0, 0)])
    mat = np.stack([r / np.linalg.norm(r) for r in table.rays])
    full = (1 << nr) - 1
    if rank(mat, tol.rank) < local_dim:
        return NonSpanningFamily(table.party, [(full, _covered(table, full))])

    found: set[int] = set()
    combos = np.array(list(itertools.combinations(range(nr), local_dim - 1)), dtype=int)
    for start in range(0, len(combos), 4096):
        chunk = combos[start : start + 4096]
        sub = mat[chunk]  # (N, d-1, d)
        _, s, vh = np.linalg.svd(sub, full_matrices=True)
        ok = s[:, -1] > tol.rank * s[:, 0]
        # x = conj(last right singular vector) solves sub @ x = 0, so a ray r
        # lies in the span of the chosen rays iff r @ x = 0
        normals = vh[ok, -1, :].conj()
        if normals.size == 0:
            continue
        ov = np.abs(mat @ normals.T)  # (nr, N)
        inside = ov <= tol.zero
        weights = 1 << np.arange(nr, dtype=object)
        for col in inside.T:
            found.add(int(np.sum(weights[col])))
    subsets = sorted(found)
    return NonSpanningFamily(table.party, [(b, _covered(table, b)) for b in subsets])


def maximal_nonspanning_bruteforce(
    table: RayTable, local_dim: int, tol: Tolerances = DEFAULT_TOL
) -> NonSpanningFamily:
    """Reference enumeration over every subset of rays."""
    _check_budget(table)
    nr = len(table.rays)
    mat = np.stack(table.rays) if nr else np.zeros((0, local_dim))
    nonspan = []
    for bits in range(1 << nr):
        idx = list(_bits(bits))
        if not idx or rank(mat[idx], tol.rank) < local_dim:
            nonspan.append(bits)
    maximal = [b for b in nonspan if not any(o != b and o & b == b for o in nonspan)]
    return NonSpanningFamily(table.party, [(b, _covered(table, b)) for b in maximal])


def orthogonality_defects(s: StateSet, tol: float = DEFAULT_TOL.zero) -> list[tuple[int, int, float]]:
    """Pairs ``(i, j, |<i|j>|/(|i||j|))`` that are not orthogonal."""
    g = np.abs(s.gram())
    norms = np.sqrt(np.diag(g))
    rel = g / np.outer(norms, norms)
    np.fill_diagonal(rel, 0.0)
    bad = np.argwhere(np.triu(rel > tol))
    return [(int(i), int(j), float(rel[i, j])) for i, j in bad]


def _require_orthogonal(s: StateSet, tol: Tolerances) -> None:
    bad = orthogonality_defects(s, tol.zero)
    if bad:
        i, j, v = bad[0]
        raise PreconditionError(
            f"states {s[i].label!r} and {s[j].label!r} are not orthogonal "
            f"(|overlap| = {v:.3g}; {len(bad)} offending pairs)"
        )


def _bool_rows(subsets: list[tuple[int, int]], nstates: int) -> np.ndarray:
    out = np.zeros((len(subsets), nstates), dtype=bool)
    for k, (_, cov) in enumerate(subsets):
        out[k, list(_bits(cov))] = True
    return out


def _search_cover(families: list[NonSpanningFamily], nstates: int) -> list[tuple[int, int]] | None:
    """One subset per party whose covered states union to everything.

    Parties are visited in order of fewest subsets.  The last two levels are
    resolved together: a residual ``R`` (left after the penultimate choice)
    fits inside a last-level subset ``C`` iff ``R . (1 - C) == 0``, which is
    one matrix product for all candidate pairs at once.
    """
    order = sorted(range(len(families)), key=lambda p: len(families[p].subsets))
    options = [[(0, 0)] + list(families[p].subsets) for p in order]  # (0, 0): party takes nothing
    rows = [_bool_rows(opts, nstates) for opts in options]
    n = len(options)
    chosen: list[tuple[int, int]] = [(0, 0)] * n
    seen: set[tuple[int, bytes]] = set()

    def last_two(need: np.ndarray) -> bool:
        if n == 1:
            hit = np.flatnonzero(~(need & ~rows[0]).any(axis=1))
            if hit.size:
                chosen[0] = options[0][hit[0]]
                return True
            return False
        res = (need & ~rows[n - 2]).astype(np.float32)
        miss = (~rows[n - 1]).astype(np.float32)
        counts = res @ miss.T
        hit = np.argwhere(counts == 0)
        if hit.size == 0:
            return False
        i, j = hit[0]
        chosen[n - 2] = options[n - 2][i]
        chosen[n - 1] = options[n - 1][j]
        return True

    def dfs(lvl: int, need: np.ndarray) -> bool:
        if lvl >= n - 2:
            return last_two(need)
        key = (lvl, np.packbits(need).tobytes())
        if key in seen:
            return False
        seen.add(key)
        for k, opt in enumerate(options[lvl]):
            chosen[lvl] = opt
            if dfs(lvl + 1, need & ~rows[lvl][k]):
                return True
        return False

    if not dfs(0, np.ones(nstates, dtype=bool)):
        return None
    out = [(0, 0)] * n
    for lvl, p in enumerate(order):
        out[p] = chosen[lvl]
    return out


def find_extension(s: StateSet, tol: Tolerances = DEFAULT_TOL) -> ExtensionWitness | None:
    """A product state orthogonal to every member, or ``None`` for a UPB."""
    _require_orthogonal(s, tol)
    tables = [distinct_rays(s, p) for p in range(s.nparties)]
    families = [maximal_nonspanning(t, s.dims[t.party], tol) for t in tables]
    cover = _search_cover(families, len(s))
    if cover is None:
        return None
    factors = []
    for table, (raybits, _) in zip(tables, cover):
        ids = list(_bits(raybits))
        if ids:
            rays = np.stack([table.rays[i] for i in ids])
            w = nullspace_complex(rays.conj(), tol.rank)[0]
        else:
            w = np.zeros(s.dims[table.party], dtype=complex)
            w[0] = 1
        factors.append(w)
    witness = ProductState(tuple(factors), "witness")
    wn = np.sqrt(witness.norm2())
    residual = max(
        (abs(product_inner(st, witness)) / (np.sqrt(st.norm2()) * wn) for st in s), default=0.0
    )
    if residual > 1e-8:
        raise ConsistencyError(f"extension witness failed validation (residual {residual:.3g})")
    return ExtensionWitness(witness.factors, float(residual))


def is_upb(s: StateSet, tol: Tolerances = DEFAULT_TOL) -> UpbVerdict:
    """Classify ``s`` as a UPB, an extendible set, or an invalid input."""
    bad = orthogonality_defects(s, tol.zero)
    if bad:
        diag = [f"{s[i].label} vs {s[j].label}: |overlap| = {v:.3g}" for i, j, v in bad[:10]]
        return UpbVerdict(UpbStatus.INVALID, None, diag)
    try:
        w = find_extension(s, tol)
    except (ResourceError, ConsistencyError) as exc:
        return UpbVerdict(UpbStatus.INVALID, None, [str(exc)])
    if w is None:
        return UpbVerdict(UpbStatus.UPB)
    return UpbVerdict(UpbStatus.EXTENDIBLE, w)
