"""Block deduction rules for orthogonality-preserving measurement operators.

The engine tracks what is known about an unknown Hermitian ``E`` on the
measured parties: which off-diagonal entries are zero, and which diagonal
entries are equal.  Rules:

R1  block zeros: orthogonal families spanning disjoint coordinate blocks
    ``S`` and ``T`` with every cross condition ``<s|E|t> = 0`` give
    ``E[S, T] = 0``.
R2  block trivial: an orthogonal basis of ``span(S)`` with pairwise zero
    conditions, plus a pivot row ``t`` of ``E`` vanishing on ``S \\ {t}``
    and overlapping every basis vector, gives ``E[S, S] = c I``.
R3  restrict: in ``<x|E|y> = 0``, rows of ``x`` already known to vanish
    against the support of ``y`` can be dropped.
R4  merge: two resolved blocks sharing an index share their constant.
R5  residual solve: the remaining unknowns are solved numerically.

The engine is deliberately incomplete; R5 closes the gap and the
certificate records exactly which conclusions needed it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, DomainError, RuleNotApplicable
from .linalg import (
    DEFAULT_TOL,
    SolutionSpace,
    Tolerances,
    hermitian_param_rows,
    nullspace_real,
    params_to_hermitian,
    r_factor,
    rank,
    root_of_unity,
)
from .opm import MeasuredSubset, build_constraints, solution_space
from .states import StateSet, eta, xi
from .unextend import distinct_rays

__all__ = [
    "Knowledge",
    "Step",
    "Certificate",
    "OracleReport",
    "LayerOverlapReport",
    "r1_block_zeros",
    "r2_block_trivial",
    "r3_restrict",
    "r4_merge",
    "certify",
    "check_soundness",
    "lemma1_oracle",
    "lemma2_oracle",
    "check_layer_overlaps",
]

_SOUND_TOL = 1e-8


class Knowledge:
    """Zero pattern and diagonal equalities known about ``E``."""

    def __init__(self, m: int):
        if m < 1:
            raise DomainError(f"operator dimension must be positive, got {m}")
        self.m = m
        self.zero = np.zeros((m, m), dtype=bool)
        self._parent = list(range(m))
        self.resolved: list[frozenset[int]] = []

    def copy(self) -> "Knowledge":
        k = Knowledge(self.m)
        k.zero = self.zero.copy()
        k._parent = list(self._parent)
        k.resolved = list(self.resolved)
        return k

    def find(self, i: int) -> int:
        while self._parent[i] != i:
            self._parent[i] = self._parent[self._parent[i]]
            i = self._parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        a, b = self.find(i), self.find(j)
        if a == b:
            return False
        # smaller index is the representative, so patterns are canonical
        if b < a:
            a, b = b, a
        self._parent[b] = a
        return True

    def mark_zero(self, pairs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
        """Mark entries and their mirrors; returns the new ``(i<j)`` pairs."""
        new = []
        for i, j in pairs:
            if i == j:
                raise DomainError("diagonal entries are never marked zero")
            if not self.zero[i, j]:
                self.zero[i, j] = self.zero[j, i] = True
                new.append((min(i, j), max(i, j)))
        return sorted(set(new))

    def unknown_rows(self, support: Sequence[int]) -> np.ndarray:
        """Rows ``r`` with some entry ``(r, t)``, ``t`` in ``support``, not known zero."""
        mask = np.zeros(self.m, dtype=bool)
        if len(support):
            mask = ~self.zero[:, list(support)].all(axis=1)
            mask[list(support)] = True  # diagonal entries are never zero
        return mask

    def classes(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for i in range(self.m):
            groups.setdefault(self.find(i), []).append(i)
        return sorted(groups.values())

    def pattern(self) -> tuple[bytes, tuple[int, ...]]:
        """Canonical, hashable form of the zero pattern and diagonal classes."""
        return self.zero.tobytes(), tuple(self.find(i) for i in range(self.m))

    def block_diagonal_with(self, blocks: Sequence[Sequence[int]]) -> bool:
        """True iff the zero pattern is exactly 'zero between different blocks'."""
        label = np.full(self.m, -1)
        for b, idx in enumerate(blocks):
            label[list(idx)] = b
        if (label < 0).any():
            raise DomainError("blocks must cover every index")
        expected = label[:, None] != label[None, :]
        return bool(np.array_equal(expected, self.zero))


@dataclass(frozen=True)
class Step:
    rule: str
    states: tuple[str, ...] = ()
    S: tuple[int, ...] = ()
    T: tuple[int, ...] = ()
    zeros: tuple[tuple[int, int], ...] = ()
    merges: tuple[tuple[int, int], ...] = ()
    note: str = ""

    def apply(self, k: Knowledge) -> None:
        k.mark_zero(self.zeros)
        for a, b in self.merges:
            k.union(a, b)
        if self.rule == "R2":
            k.resolved.append(frozenset(self.S))


def _index_names(index_dims: Sequence[int]) -> list[str]:
    sep = "" if max(index_dims) <= 10 else "."
    names = []
    for flat in range(math.prod(index_dims)):
        digits = np.unravel_index(flat, tuple(index_dims))
        names.append(sep.join(str(int(x)) for x in digits))
    return names


def _json_float(x: float):
    return "inf" if math.isinf(x) else x


@dataclass
class Certificate:
    set_name: str
    measured: str
    index_dims: tuple[int, ...]
    steps: list[Step] = field(default_factory=list)
    residual_dim: int | None = None
    gap_ratio: float = math.inf
    notes: tuple[str, ...] = ()  # construction notes of the set, e.g. index readings

    @property
    def m(self) -> int:
        return math.prod(self.index_dims)

    def replay(self, upto: int | None = None) -> Knowledge:
        k = Knowledge(self.m)
        for step in self.steps[:upto]:
            step.apply(k)
        return k

    def phase1_length(self) -> int:
        """Length of the leading run of R1/R3 steps."""
        n = 0
        for step in self.steps:
            if step.rule not in ("R1", "R3"):
                break
            n += 1
        return n

    def phase1(self) -> Knowledge:
        return self.replay(self.phase1_length())

    def rule_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for step in self.steps:
            out[step.rule] = out.get(step.rule, 0) + 1
        return out

    def to_text(self) -> str:
        names = _index_names(self.index_dims)
        fmt = lambda idx: ",".join(names[i] for i in idx) or "-"  # noqa: E731
        lines = [f"# certificate for {self.set_name}, measured {self.measured}, m={self.m}"]
        lines += [f"# note: {n}" for n in self.notes]
        for step in self.steps:
            line = (
                f"{step.rule} | states: {','.join(step.states) or '-'} | S: {fmt(step.S)} | "
                f"T/basis: {fmt(step.T)} | delta: {len(step.zeros)} zeros, {len(step.merges)} merges"
            )
            if step.note:
                line += f" | {step.note}"
            lines.append(line)
        lines.append(f"# residual dim {self.residual_dim}, gap ratio {self.gap_ratio:.3g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "format": "upbv-certificate",
            "version": 1,
            "set": self.set_name,
            "measured": self.measured,
            "index_dims": list(self.index_dims),
            "residual_dim": self.residual_dim,
            "gap_ratio": _json_float(self.gap_ratio),
            "notes": list(self.notes),
            "steps": [
                {
                    "rule": s.rule,
                    "states": list(s.states),
                    "S": list(s.S),
                    "T": list(s.T),
                    "zeros": [list(z) for z in s.zeros],
                    "merges": [list(p) for p in s.merges],
                    "note": s.note,
                }
                for s in self.steps
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        doc = json.loads(text)
        if doc.get("format") != "upbv-certificate":
            raise DomainError("not a certificate document")
        steps = [
            Step(
                s["rule"],
                tuple(s["states"]),
                tuple(s["S"]),
                tuple(s["T"]),
                tuple(tuple(z) for z in s["zeros"]),
                tuple(tuple(p) for p in s["merges"]),
                s.get("note", ""),
            )
            for s in doc["steps"]
        ]
        gap = doc.get("gap_ratio", "inf")
        return cls(
            doc["set"],
            doc["measured"],
            tuple(doc["index_dims"]),
            steps,
            doc.get("residual_dim"),
            math.inf if gap == "inf" else float(gap),
            tuple(doc.get("notes", ())),
        )


# --- rules -----------------------------------------------------------------


def _support(v: np.ndarray, tol: float) -> np.ndarray:
    a = np.abs(v)
    return np.flatnonzero(a > tol * max(a.max(initial=0.0), 1e-300))


def _spans_block(vecs: np.ndarray, block: Sequence[int], tol: Tolerances) -> bool:
    block = list(block)
    outside = np.ones(vecs.shape[1], dtype=bool)
    outside[block] = False
    scale = np.abs(vecs).max(initial=0.0)
    if scale == 0 or np.abs(vecs[:, outside]).max(initial=0.0) > tol.zero * scale:
        return False
    return rank(vecs[:, block], tol.rank) == len(block)


def _same(u: np.ndarray, v: np.ndarray) -> bool:
    return u.shape == v.shape and np.allclose(u, v, rtol=0, atol=1e-12)


def _block_pairs(S: Iterable[int], T: Iterable[int]):
    return [(s, t) for s in S for t in T]


def r1_block_zeros(
    k: Knowledge,
    S: Sequence[int],
    T: Sequence[int],
    conditions: Sequence[tuple[np.ndarray, np.ndarray]],
    tol: Tolerances = DEFAULT_TOL,
) -> Knowledge:
    """Block zeros rule; returns a new :class:`Knowledge`."""
    S, T = sorted(set(S)), sorted(set(T))
    if not S or not T or set(S) & set(T):
        raise RuleNotApplicable("S and T must be nonempty and disjoint")
    lefts: list[np.ndarray] = []
    rights: list[np.ndarray] = []
    present = set()
    for x, y in conditions:
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        li = next((n for n, u in enumerate(lefts) if _same(u, x)), None)
        if li is None:
            li = len(lefts)
            lefts.append(x)
        ri = next((n for n, u in enumerate(rights) if _same(u, y)), None)
        if ri is None:
            ri = len(rights)
            rights.append(y)
        present.add((li, ri))
    if not lefts:
        raise RuleNotApplicable("no conditions given")
    if len(present) != len(lefts) * len(rights):
        raise RuleNotApplicable("some cross conditions between the two families are missing")
    if not _spans_block(np.stack(lefts), S, tol):
        raise RuleNotApplicable("left vectors do not span the S block")
    if not _spans_block(np.stack(rights), T, tol):
        raise RuleNotApplicable("right vectors do not span the T block")
    out = k.copy()
    out.mark_zero(_block_pairs(S, T))
    return out


def r2_block_trivial(
    k: Knowledge,
    S: Sequence[int],
    basis: Sequence[np.ndarray],
    pivot: int,
    tol: Tolerances = DEFAULT_TOL,
) -> Knowledge:
    """Block trivial rule; returns a new :class:`Knowledge`.

    The pairwise conditions ``<psi_i|E|psi_j> = 0`` are the caller's to
    supply (``certify`` draws them from the active-pair inventory).  The
    pivot row must vanish on ``S`` minus the pivot.
    """
    S = sorted(set(S))
    if pivot not in S:
        raise RuleNotApplicable(f"pivot {pivot} is not in S")
    vecs = np.stack([np.asarray(b, dtype=complex) for b in basis]) if len(basis) else np.zeros((0, k.m))
    if len(vecs) != len(S) or not _spans_block(vecs, S, tol):
        raise RuleNotApplicable("basis does not span the S block")
    g = vecs.conj() @ vecs.T
    norms = np.sqrt(np.real(np.diag(g)))
    off = np.abs(g - np.diag(np.diag(g))) / np.outer(norms, norms)
    if off.max(initial=0.0) > tol.zero:
        raise RuleNotApplicable("basis is not orthogonal")
    others = [s for s in S if s != pivot]
    if others and not k.zero[pivot, others].all():
        raise RuleNotApplicable(f"pivot row {pivot} is not known to vanish on the rest of S")
    if (np.abs(vecs[:, pivot]) <= tol.zero * norms).any():
        raise RuleNotApplicable("pivot is orthogonal to some basis vector")
    out = k.copy()
    out.mark_zero([(a, b) for a in S for b in S if a < b])
    for s in others:
        out.union(pivot, s)
    out.resolved.append(frozenset(S))
    return out


def r3_restrict(k: Knowledge, condition: tuple[np.ndarray, np.ndarray], tol: Tolerances = DEFAULT_TOL):
    """Drop rows of ``x`` that are known to vanish against ``support(y)``."""
    x, y = condition
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    keep = k.unknown_rows(_support(y, tol.zero))
    return np.where(keep, x, 0), y


def r4_merge(k: Knowledge, S1: Iterable[int], S2: Iterable[int]) -> Knowledge:
    """Merge the constants of two overlapping resolved blocks."""
    S1, S2 = frozenset(S1), frozenset(S2)
    if S1 not in k.resolved or S2 not in k.resolved:
        raise RuleNotApplicable("both blocks must already be resolved")
    common = S1 & S2
    if not common:
        raise RuleNotApplicable("blocks are disjoint")
    out = k.copy()
    out.union(min(S1), min(S2))
    return out


# --- the engine ------------------------------------------------------------


class _Engine:
    def __init__(self, s: StateSet, measured: MeasuredSubset, tol: Tolerances):
        self.s = s
        self.tol = tol
        self.measured = measured
        self.index_dims = tuple(s.dims[p] for p in measured.parties)
        self.m = measured.m
        vecs = []
        for st in s:
            v = st.factors[measured.parties[0]]
            for p in measured.parties[1:]:
                v = np.kron(v, st.factors[p])
            vecs.append(v / np.linalg.norm(v))
        self.vecs = np.array(vecs)
        self.supports = [frozenset(_support(v, tol.zero).tolist()) for v in self.vecs]
        n = len(s)
        self.labels = s.labels
        # active[i, j]: unmeasured parts overlap, so <i|E|j> = 0 is a condition
        ov = np.ones((n, n), dtype=complex)
        scale = np.ones((n, n))
        unmeasured = [p for p in range(s.nparties) if p not in measured.parties]
        for p, g in enumerate(s.party_grams()):
            if p in unmeasured:
                nr = np.sqrt(np.real(np.diag(g)))
                ov = ov * g
                scale = scale * np.outer(nr, nr)
        self.active = np.abs(ov) > tol.zero * scale
        # fibers: states sharing every unmeasured ray
        keys = list(zip(*[distinct_rays(s, p).assignment for p in unmeasured]))
        fibers: dict[tuple, list[int]] = {}
        for i, key in enumerate(keys):
            fibers.setdefault(key, []).append(i)
        self.fibers = list(fibers.values())
        self.fiber_of = {i: f for f, members in enumerate(self.fibers) for i in members}
        self.groups = self._spanning_groups()
        self.k = Knowledge(self.m)
        self.cert = Certificate(s.name, measured.name, self.index_dims, notes=tuple(s.notes))

    def _components(self, items: list[int], supports) -> list[list[int]]:
        parent = {i: i for i in items}

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        owner: dict[int, int] = {}
        for i in items:
            for idx in supports[i]:
                if idx in owner:
                    parent[find(i)] = find(owner[idx])
                else:
                    owner[idx] = i
        comps: dict[int, list[int]] = {}
        for i in items:
            comps.setdefault(find(i), []).append(i)
        return list(comps.values())

    def _spanning_groups(self) -> list[tuple[list[int], list[int]]]:
        out = []
        for members in self.fibers:
            for comp in self._components(members, self.supports):
                block = sorted(set().union(*(self.supports[i] for i in comp)))
                if rank(self.vecs[comp][:, block], self.tol.rank) == len(block):
                    out.append((comp, block))
        return out

    def _record(self, step: Step) -> None:
        step.apply(self.k)
        self.cert.steps.append(step)

    def r1_pass(self) -> bool:
        changed = False
        for group, T in self.groups:
            rep = group[0]
            tset = set(T)
            keep = self.k.unknown_rows(T)
            cands = {}
            restricted = set()
            for i in np.flatnonzero(self.active[rep]):
                i = int(i)
                if i in group:
                    continue
                x = np.where(keep, self.vecs[i], 0)
                sup = frozenset(_support(x, self.tol.zero).tolist()) if x.any() else frozenset()
                if not sup or sup & tset:
                    continue
                cands[i] = (x, sup)
                if sup != self.supports[i]:
                    restricted.add(i)
            if not cands:
                continue
            sups = {i: c[1] for i, c in cands.items()}
            batches = self._components(list(cands), sups)
            by_fiber: dict[int, list[int]] = {}
            for i in cands:
                by_fiber.setdefault(self.fiber_of[i], []).append(i)
            for members in by_fiber.values():
                batches += self._components(members, sups)
            for comp in batches:
                S = sorted(set().union(*(sups[i] for i in comp)))
                pairs = [(a, b) for a in S for b in T if not self.k.zero[a, b]]
                if not pairs:
                    continue
                lefts = np.stack([cands[i][0] for i in comp])
                if rank(lefts[:, S], self.tol.rank) != len(S):
                    continue
                used = sorted(i for i in comp if i in restricted)
                if used:
                    self._record(
                        Step(
                            "R3",
                            tuple(self.labels[i] for i in used),
                            tuple(S),
                            tuple(T),
                            note="rows known to vanish against T dropped",
                        )
                    )
                cited = tuple(self.labels[i] for i in sorted(comp)) + tuple(self.labels[i] for i in group)
                zeros = sorted({(min(a, b), max(a, b)) for a, b in pairs})
                self._record(Step("R1", cited, tuple(S), tuple(T), tuple(zeros)))
                changed = True
        return changed

    def _r2_basis(self, group: list[int], S: list[int]):
        """Orthogonal basis of span(S) with pairwise conditions, or None."""
        vecs = [self.vecs[i] for i in group]
        used = list(group)
        if len(vecs) == len(S) - 1:
            sset = set(S)
            keep = self.k.unknown_rows(S)
            for i in range(len(self.s)):
                if i in group or not self.active[i, group].all():
                    continue
                x = np.where(keep, self.vecs[i], 0)
                sup = set(_support(x, self.tol.zero).tolist()) if x.any() else set()
                if not sup or not sup <= sset:
                    continue
                if max(abs(np.vdot(x, v)) for v in vecs) > self.tol.zero * np.linalg.norm(x):
                    continue
                vecs.append(x)
                used.append(i)
                break
        if len(vecs) != len(S):
            return None
        return vecs, used

    def r2_pass(self) -> bool:
        changed = False
        for group, S in self.groups:
            fs = frozenset(S)
            if len(S) < 2 or fs in self.k.resolved:
                continue
            found = self._r2_basis(group, S)
            if found is None:
                continue
            basis, used = found
            for t in S:
                try:
                    nk = r2_block_trivial(self.k, S, basis, t, self.tol)
                except RuleNotApplicable:
                    continue
                zeros = tuple(sorted((a, b) for a in S for b in S if a < b and not self.k.zero[a, b]))
                merges = tuple((t, u) for u in S if u != t and self.k.find(u) != self.k.find(t))
                step = Step("R2", tuple(self.labels[i] for i in used), tuple(S), (t,), zeros, merges)
                self._record(step)
                assert self.k.pattern() == nk.pattern()
                changed = True
                break
        return changed

    def r4_pass(self, done: set) -> bool:
        changed = False
        res = self.k.resolved
        for a in range(len(res)):
            for b in range(a + 1, len(res)):
                if (res[a], res[b]) in done or not res[a] & res[b]:
                    continue
                done.add((res[a], res[b]))
                merges = ((min(res[a]), min(res[b])),) if self.k.find(min(res[a])) != self.k.find(min(res[b])) else ()
                self._record(Step("R4", (), tuple(sorted(res[a])), tuple(sorted(res[b])), (), merges))
                changed = changed or bool(merges)
        return changed

    def r5(self) -> SolutionSpace:
        m = self.m
        k = self.k
        iu = np.triu_indices(m, 1)
        free_pairs = [n for n in range(len(iu[0])) if not k.zero[iu[0][n], iu[1][n]]]
        classes = k.classes()
        nfree = len(classes) + 2 * len(free_pairs)
        lift = np.zeros((m * m, nfree))
        for c, members in enumerate(classes):
            lift[members, c] = 1.0
        for n, pidx in enumerate(free_pairs):
            lift[m + 2 * pidx, len(classes) + 2 * n] = 1.0
            lift[m + 2 * pidx + 1, len(classes) + 2 * n + 1] = 1.0
        cs = build_constraints(self.s, self.measured, self.tol)
        r = r_factor(cs.row_chunks(), m * m)
        reduced = r @ lift
        basis, gap = nullspace_real(reduced, self.tol.rank)
        zeros = []
        for n, pidx in enumerate(free_pairs):
            cols = basis[:, len(classes) + 2 * n : len(classes) + 2 * n + 2]
            if np.abs(cols).max(initial=0.0) <= _SOUND_TOL:
                zeros.append((int(iu[0][pidx]), int(iu[1][pidx])))
        merges = []
        for a in range(len(classes)):
            for b in range(a + 1, len(classes)):
                if np.abs(basis[:, a] - basis[:, b]).max(initial=0.0) <= _SOUND_TOL:
                    if k.find(classes[a][0]) != k.find(classes[b][0]):
                        merges.append((classes[a][0], classes[b][0]))
                        # keep later comparisons honest by tracking the union
                        k.union(classes[a][0], classes[b][0])
        # undo the tracking unions; the step re-applies them
        self.k = self.cert.replay()
        dim = basis.shape[0]
        note = f"residual dim {dim}, {nfree} free parameters"
        self._record(Step("R5", (), (), (), tuple(zeros), tuple(merges), note))
        full = basis @ lift.T
        if dim:
            q, _ = np.linalg.qr(full.T)
            full = q.T
        self.cert.residual_dim = dim
        self.cert.gap_ratio = gap
        return SolutionSpace(dim, full, gap)


def check_soundness(cert: Certificate, space: SolutionSpace) -> list[str]:
    """Derived zeros and equalities that some solution violates."""
    k = cert.replay()
    problems = []
    for op in space.operators():
        scale = max(1.0, float(np.abs(op).max(initial=0.0)))
        bad = np.argwhere(k.zero & (np.abs(op) > _SOUND_TOL * scale))
        for i, j in bad[:5]:
            problems.append(f"entry ({i},{j}) marked zero but is {abs(op[i, j]):.3g}")
        diag = np.real(np.diag(op))
        for members in k.classes():
            spread = np.ptp(diag[members]) if len(members) > 1 else 0.0
            if spread > _SOUND_TOL * scale:
                problems.append(f"diagonal class {members} spreads by {spread:.3g}")
    return problems


def certify(
    s: StateSet, measured="BC", tol: Tolerances = DEFAULT_TOL, validate: bool = True
) -> tuple[Certificate, SolutionSpace]:
    """Run R1 -> R3 -> R2 -> R4 to a fixed point, then close with R5."""
    if s.nparties != 3:
        raise DomainError(f"certify needs a tripartite set, got {s.nparties} parties")
    if not isinstance(measured, MeasuredSubset):
        measured = MeasuredSubset.of(measured, s.dims)
    eng = _Engine(s, measured, tol)
    done: set = set()
    while True:
        progress = eng.r1_pass()
        progress = eng.r2_pass() or progress
        progress = eng.r4_pass(done) or progress
        if not progress:
            break
    residual = eng.r5()
    cert = eng.cert
    if cert.replay().pattern() != eng.k.pattern():
        raise ConsistencyError("certificate replay does not reproduce the engine state")
    if validate:
        numeric = solution_space(build_constraints(s, measured, tol), tol)
        problems = check_soundness(cert, numeric)
        if problems:
            raise ConsistencyError("unsound deduction: " + "; ".join(problems[:5]))
    return cert, residual


# --- lemma oracles ---------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    lemma: str
    trials: int
    n: int
    violations: int
    max_error: float
    rejected: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.lemma}: {verdict} ({self.trials} trials, n={self.n}, "
            f"{self.violations} violations, max error {self.max_error:.2e}, {self.rejected} rejected samples)"
        )


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _embed(cols: np.ndarray, idx: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros((cols.shape[1], n), dtype=complex)
    out[:, list(idx)] = cols.T
    return out


def _random_solution(rng: np.random.Generator, left, right, n: int) -> np.ndarray:
    rows = hermitian_param_rows(np.asarray(left), np.asarray(right))
    basis, _ = nullspace_real(rows)
    coeffs = rng.normal(size=basis.shape[0])
    e = params_to_hermitian(coeffs @ basis)
    return e / max(np.abs(e).max(), 1e-300)


def lemma1_oracle(trials: int = 200, n: int = 8, seed: int | None = 0) -> OracleReport:
    """Random-instance check of the block zeros lemma."""
    if not 2 <= n <= 12:
        raise DomainError(f"lemma1_oracle needs 2 <= n <= 12, got {n}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    for _ in range(trials):
        perm = rng.permutation(n)
        s = int(rng.integers(1, n))
        t = int(rng.integers(1, n - s + 1))
        S, T = sorted(perm[:s]), sorted(perm[s : s + t])
        psi = _embed(_random_unitary(rng, s), S, n)
        phi = _embed(_random_unitary(rng, t), T, n)
        left = np.repeat(psi, t, axis=0)
        right = np.tile(phi, (s, 1))
        e = _random_solution(rng, left, right, n)
        err = max(np.abs(e[np.ix_(S, T)]).max(), np.abs(e[np.ix_(T, S)]).max())
        worst = max(worst, float(err))
        bad += err > 1e-9
    return OracleReport("block zeros", trials, n, int(bad), worst)


def _pivot_ok(basis: np.ndarray, pivot: int, tol: float = DEFAULT_TOL.zero) -> bool:
    norms = np.linalg.norm(basis, axis=1)
    return bool((np.abs(basis[:, pivot]) > tol * norms).all())


def lemma2_oracle(trials: int = 200, n: int = 8, seed: int | None = 0) -> OracleReport:
    """Random-instance check of the block trivial lemma.

    Bases are Fourier bases of ``span(S)`` with random coordinate phases and
    a random unitary mixing of rows that keeps the pivot overlaps nonzero;
    samples that break the pivot condition are rejected and counted.
    """
    if not 2 <= n <= 12:
        raise DomainError(f"lemma2_oracle needs 2 <= n <= 12, got {n}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    bad = 0
    rejected = 0
    done = 0
    while done < trials:
        s = int(rng.integers(2, n + 1))
        S = sorted(rng.choice(n, size=s, replace=False))
        four = np.array([[root_of_unity(s, i * j) for j in range(s)] for i in range(s)])
        phases = np.exp(2j * np.pi * rng.random(s))
        cols = phases[:, None] * four * np.exp(2j * np.pi * rng.random(s))[None, :]
        if rng.random() < 0.5:
            # a random unitary on span(S) in place of the Fourier basis
            cols = _random_unitary(rng, s)
        basis = _embed(cols, S, n)
        pivot = int(S[rng.integers(s)])
        if not _pivot_ok(basis, pivot):
            rejected += 1
            continue
        left, right = [], []
        for i in range(s):
            for j in range(s):
                if i != j:
                    left.append(basis[i])
                    right.append(basis[j])
        eye = np.eye(n, dtype=complex)
        for u in S:
            if u != pivot:
                left.append(eye[pivot])
                right.append(eye[u])
        e = _random_solution(rng, left, right, n)
        block = e[np.ix_(S, S)]
        err = float(np.abs(block - block[0, 0] * np.eye(s)).max())
        worst = max(worst, err)
        bad += err > 1e-9
        done += 1
    return OracleReport("block trivial", trials, n, int(bad), worst, rejected)


@dataclass(frozen=True)
class LayerOverlapReport:
    d: int
    layers: tuple[int, ...]
    min_modulus: float
    argmin: tuple[str, int, int]
    passed: bool


def check_layer_overlaps(d: int, tol: float = DEFAULT_TOL.zero) -> LayerOverlapReport:
    """Nonorthogonality of the first Fourier windows across every layer pair."""
    if d < 3:
        raise DomainError(f"check_layer_overlaps needs d >= 3, got {d}")
    layers = tuple(range((d - 3) // 2 + 1))
    best = (math.inf, ("", -1, -1))
    for a in layers:
        for b in layers:
            for kind, u, v in (
                ("xi-xi", xi(d, a, 1), xi(d, b, 1)),
                ("eta-eta", eta(d, a, 1), eta(d, b, 1)),
                ("xi-eta", xi(d, a, 1), eta(d, b, 1)),
            ):
                val = abs(np.vdot(u, v))
                if val < best[0]:
                    best = (val, (kind, a, b))
    return LayerOverlapReport(d, layers, float(best[0]), best[1], best[0] > tol)
