"""Constructors for the tripartite UPB families and the 3x4 contrast set."""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .linalg import kron, root_of_unity
from .states import ProductState, StateSet, basis_ket, eta, ones_ket, phi, stopper, xi

__all__ = [
    "FamilyId",
    "ComplementVector",
    "B1_INDEX_READING",
    "upb_333",
    "upb_444",
    "upb_ddd",
    "expected_size",
    "tiles_34",
    "complement_phi_3",
    "build_family",
    "cyclic_shift",
    "ray_match",
    "same_ray_set",
]

# The printed index set of the B1 block reads Z_{d,d-1-2k}; every sibling
# block (and the size count) uses Z_{d-1-2k} x Z_{d-1-2k}.
B1_INDEX_READING = "B1 index set read as Z_{d-1-2k} x Z_{d-1-2k} minus (0,0)"


class FamilyId(str, Enum):
    UPB333 = "upb333"
    UPB444 = "upb444"
    UPBDDD = "ddd"
    TILES34 = "tiles34"
    COMPLEMENT_PHI_3 = "phi3"


def _pairs(n: int):
    """``Z_n x Z_n`` minus ``(0, 0)`` as ``(i, j)``, ``i`` outer."""
    return [(i, j) for i in range(n) for j in range(n) if (i, j) != (0, 0)]


def upb_333() -> StateSet:
    """The 19-state UPB in 3x3x3, written out block by block."""
    ket = lambda i: basis_ket(3, i)  # noqa: E731
    et = [ket(0) + ket(1), ket(0) - ket(1)]
    xs = [ket(1) + ket(2), ket(1) - ket(2)]
    blocks = {
        "A1": lambda i, j: (xs[j], ket(0), et[i]),
        "A2": lambda i, j: (xs[j], et[i], ket(2)),
        "A3": lambda i, j: (ket(2), xs[j], et[i]),
        "B1": lambda i, j: (et[i], ket(2), xs[j]),
        "B2": lambda i, j: (et[i], xs[j], ket(0)),
        "B3": lambda i, j: (ket(0), et[i], xs[j]),
    }
    states = [
        ProductState(make(i, j), f"{name}[i={i},j={j}]")
        for name, make in blocks.items()
        for i, j in _pairs(2)
    ]
    states.append(stopper(3))
    return StateSet((3, 3, 3), states, "upb333")


def upb_444() -> StateSet:
    """The 56-state UPB in 4x4x4."""
    ket = lambda i: basis_ket(4, i)  # noqa: E731
    w = lambda k: root_of_unity(3, k)  # noqa: E731
    et = [sum(w(i * k) * ket(k) for k in range(3)) for i in range(3)]
    xs = [sum(w(j * k) * ket(k + 1) for k in range(3)) for j in range(3)]
    ph = [ket(1) + ket(2), ket(1) - ket(2)]
    states = [
        ProductState((ph[r], ph[s], ph[t]), f"A0[r={r},s={s},t={t}]")
        for r in range(2)
        for s in range(2)
        for t in range(2)
        if (r, s, t) != (0, 0, 0)
    ]
    blocks = {
        "A1": lambda i, j: (xs[j], ket(0), et[i]),
        "A2": lambda i, j: (xs[j], et[i], ket(3)),
        "A3": lambda i, j: (ket(3), xs[j], et[i]),
        "B1": lambda i, j: (et[i], ket(3), xs[j]),
        "B2": lambda i, j: (et[i], xs[j], ket(0)),
        "B3": lambda i, j: (ket(0), et[i], xs[j]),
    }
    states += [
        ProductState(make(i, j), f"{name}[i={i},j={j}]")
        for name, make in blocks.items()
        for i, j in _pairs(3)
    ]
    states.append(stopper(4))
    return StateSet((4, 4, 4), states, "upb444")


def _layer(d: int, k: int) -> list[ProductState]:
    n = d - 1 - 2 * k
    lo = basis_ket(d, k)
    hi = basis_ket(d, d - 1 - k)
    E = lambda i: eta(d, k, i)  # noqa: E731
    X = lambda j: xi(d, k, j)  # noqa: E731
    blocks = {
        "A1": lambda i, j: (X(j), lo, E(i)),
        "A2": lambda i, j: (X(j), E(i), hi),
        "A3": lambda i, j: (hi, X(j), E(i)),
        "B1": lambda i, j: (E(i), hi, X(j)),
        "B2": lambda i, j: (E(i), X(j), lo),
        "B3": lambda i, j: (lo, E(i), X(j)),
    }
    return [
        ProductState(make(i, j), f"{name}[k={k},i={i},j={j}]")
        for name, make in blocks.items()
        for i, j in _pairs(n)
    ]


def upb_ddd(d: int) -> StateSet:
    """The layered UPB in d x d x d for any ``d >= 3``."""
    if d < 3:
        raise DomainError(f"upb_ddd needs d >= 3, got {d}")
    top = (d - 3) // 2 if d % 2 else (d - 4) // 2
    states: list[ProductState] = []
    for k in range(top + 1):
        states += _layer(d, k)
    if d % 2 == 0:
        states += [
            ProductState((phi(d, r), phi(d, s), phi(d, t)), f"A0[r={r},s={s},t={t}]")
            for r in range(2)
            for s in range(2)
            for t in range(2)
            if (r, s, t) != (0, 0, 0)
        ]
    states.append(stopper(d))
    return StateSet((d, d, d), states, f"upb_ddd({d})", (B1_INDEX_READING,))


def expected_size(d: int) -> int:
    """``d^3 - 8(floor((d-3)/2) + 1)``."""
    if d < 3:
        raise DomainError(f"expected_size needs d >= 3, got {d}")
    return d**3 - 8 * ((d - 3) // 2 + 1)


def tiles_34() -> StateSet:
    """Eight-state UPB in 3x4 that admits a nontrivial local measurement."""
    a = lambda i: basis_ket(3, i)  # noqa: E731
    b = lambda i: basis_ket(4, i)  # noqa: E731
    rows = [
        (a(0), b(0) - b(1)),
        (a(0) - a(1), b(2)),
        (a(2), b(1) - b(2)),
        (a(1) - a(2), b(0)),
        (ones_ket(3), b(0) + b(1) + b(2)),
        (a(0), b(3)),
        (a(1), b(3)),
        (a(2), b(3)),
    ]
    states = [ProductState(f, f"psi{n}") for n, f in enumerate(rows, start=1)]
    return StateSet((3, 4), states, "tiles34")


class ComplementVector(NamedTuple):
    name: str
    vector: np.ndarray
    cut: tuple[int, ...]  # parties on the product side of the claimed cut


def complement_phi_3() -> list[ComplementVector]:
    """Three vectors in the complement of the 3x3x3 UPB span.

    Each is a product across one cut: A|BC, C|AB and B|CA respectively.
    """
    k = lambda i: basis_ket(3, i)  # noqa: E731
    et0 = k(0) + k(1)
    xi0 = k(1) + k(2)
    v1 = kron([xi0, k(0), et0]) - kron([xi0, et0, k(2)])
    v2 = kron([k(0), et0, xi0]) - kron([et0, k(2), xi0])
    v3 = kron([k(2), xi0, et0]) - kron([et0, xi0, k(0)])
    return [
        ComplementVector("phi1", v1, (0,)),
        ComplementVector("phi2", v2, (2,)),
        ComplementVector("phi3", v3, (1,)),
    ]


def build_family(family: str | FamilyId, d: int | None = None) -> StateSet:
    """Dispatch on a family id; ``d`` is only used by the layered family."""
    fam = FamilyId(family)
    if fam is FamilyId.UPB333:
        return upb_333()
    if fam is FamilyId.UPB444:
        return upb_444()
    if fam is FamilyId.TILES34:
        return tiles_34()
    if fam is FamilyId.UPBDDD:
        if d is None:
            raise DomainError("family ddd needs d")
        return upb_ddd(d)
    raise DomainError(f"family {fam.value} is not a product-state set")


def cyclic_shift(s: StateSet) -> StateSet:
    """Map every member ``(a, b, c)`` to ``(b, c, a)``."""
    n = s.nparties
    order = [(p + 1) % n for p in range(n)]
    dims = tuple(s.dims[o] for o in order)
    return StateSet(dims, [st.permuted(order) for st in s], f"{s.name} shifted", s.notes)


def ray_match(a: StateSet, b: StateSet, tol: float = 1e-9) -> np.ndarray:
    """Boolean matrix ``M[i, j]``: state ``a_i`` is proportional to ``b_j``.

    Two nonzero vectors are proportional iff ``|<p|q>|^2 >= <p|p><q|q>``
    within relative tolerance; for product states this holds factor-wise.
    """
    if a.dims != b.dims:
        return np.zeros((len(a), len(b)), dtype=bool)
    match = np.ones((len(a), len(b)), dtype=bool)
    for p in range(a.nparties):
        fa = a.factor_matrix(p)
        fb = b.factor_matrix(p)
        ov = np.abs(fa.conj() @ fb.T) ** 2
        na = np.einsum("ij,ij->i", fa.conj(), fa).real
        nb = np.einsum("ij,ij->i", fb.conj(), fb).real
        match &= ov >= (1 - tol) * np.outer(na, nb)
    return match


def same_ray_set(a: StateSet, b: StateSet, tol: float = 1e-9) -> bool:
    """True iff the two sets contain the same rays (as sets)."""
    if len(a) != len(b) or a.dims != b.dims:
        return False
    m = ray_match(a, b, tol)
    return bool(m.any(axis=1).all() and m.any(axis=0).all())
