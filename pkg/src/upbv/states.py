"""Local Fourier-type kets and multipartite product states.

States are kept unnormalized with their exact coefficient formulas; callers
normalize on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError
from .linalg import kron, root_of_unity

__all__ = [
    "PARTY_NAMES",
    "ProductState",
    "StateSet",
    "basis_ket",
    "ones_ket",
    "eta",
    "xi",
    "phi",
    "stopper",
    "product_inner",
]

PARTY_NAMES = "ABCDEFGH"


def _ket(coeffs) -> np.ndarray:
    v = np.asarray(coeffs, dtype=complex).ravel()
    v.setflags(write=False)
    return v


def basis_ket(d: int, i: int) -> np.ndarray:
    """Computational basis ket ``|i>`` in dimension ``d``."""
    if not 0 <= i < d:
        raise DomainError(f"basis index {i} out of range for dimension {d}")
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return _ket(v)


def ones_ket(d: int) -> np.ndarray:
    return _ket(np.ones(d))


def _fourier_window(d: int, k: int, i: int, shift: int) -> np.ndarray:
    if d < 3:
        raise DomainError(f"d must be >= 3, got {d}")
    if not 0 <= k <= (d - 3) // 2:
        raise DomainError(f"layer k={k} out of range for d={d}")
    n = d - 1 - 2 * k
    if not 0 <= i < n:
        raise DomainError(f"index {i} out of range Z_{n}")
    v = np.zeros(d, dtype=complex)
    for t in range(k, d - 1 - k):
        v[t + shift] = root_of_unity(n, i * (t - k))
    return _ket(v)


def eta(d: int, k: int, i: int) -> np.ndarray:
    """``sum_{t=k}^{d-2-k} w^{i(t-k)} |t>`` with ``w`` the ``(d-1-2k)``-th root."""
    return _fourier_window(d, k, i, 0)


def xi(d: int, k: int, j: int) -> np.ndarray:
    """Same Fourier window as :func:`eta` shifted up by one level."""
    return _fourier_window(d, k, j, 1)


def phi(d: int, i: int) -> np.ndarray:
    """``|(d-2)/2> + (-1)^i |d/2>`` for even ``d``."""
    if d % 2 or d < 4:
        raise DomainError(f"phi needs even d >= 4, got {d}")
    if i not in (0, 1):
        raise DomainError(f"phi index must be 0 or 1, got {i}")
    v = np.zeros(d, dtype=complex)
    v[(d - 2) // 2] = 1
    v[d // 2] = -1 if i else 1
    return _ket(v)


@dataclass(frozen=True, eq=False)
class ProductState:
    factors: tuple[np.ndarray, ...]
    label: str = ""

    def __post_init__(self) -> None:
        factors = tuple(_ket(f) for f in self.factors)
        if len(factors) < 2:
            raise DomainError("a product state needs at least two factors")
        for f in factors:
            if not np.any(f):
                raise DomainError(f"state {self.label!r} has a zero factor")
        object.__setattr__(self, "factors", factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def vector(self) -> np.ndarray:
        return kron(self.factors)

    def norm2(self) -> float:
        return math.prod(float(np.vdot(f, f).real) for f in self.factors)

    def permuted(self, order: Sequence[int], label: str | None = None) -> "ProductState":
        """Reorder the parties: new party ``p`` holds old factor ``order[p]``."""
        return ProductState(tuple(self.factors[o] for o in order), self.label if label is None else label)


@dataclass(frozen=True, eq=False)
class StateSet:
    """A named, labeled set of product states with fixed party dimensions."""

    dims: tuple[int, ...]
    states: tuple[ProductState, ...]
    name: str = ""
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "states", tuple(self.states))
        labels = set()
        for s in self.states:
            if s.dims != self.dims:
                raise DomainError(f"state {s.label!r} has dims {s.dims}, set has {self.dims}")
            if s.label in labels:
                raise DomainError(f"duplicate label {s.label!r}")
            labels.add(s.label)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[ProductState]:
        return iter(self.states)

    def __getitem__(self, i: int) -> ProductState:
        return self.states[i]

    @property
    def nparties(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.states]

    def factor_matrix(self, party: int) -> np.ndarray:
        """Rows are the ``party`` factors of every state, in order."""
        if not self.states:
            return np.zeros((0, self.dims[party]), dtype=complex)
        return np.stack([s.factors[party] for s in self.states])

    def vectors(self) -> np.ndarray:
        """Full product vectors as rows, shape ``(len, total_dim)``."""
        return np.stack([s.vector() for s in self.states])

    def party_grams(self) -> list[np.ndarray]:
        """Per-party Gram matrices ``G[i, j] = <s_i|s_j>`` on each party."""
        out = []
        for p in range(self.nparties):
            f = self.factor_matrix(p)
            out.append(f.conj() @ f.T)
        return out

    def gram(self) -> np.ndarray:
        g = np.ones((len(self), len(self)), dtype=complex)
        for gp in self.party_grams():
            g = g * gp
        return g

    def without(self, *labels: str, name: str | None = None) -> "StateSet":
        drop = set(labels)
        missing = drop - set(self.labels)
        if missing:
            raise KeyError(f"unknown labels {sorted(missing)}")
        kept = tuple(s for s in self.states if s.label not in drop)
        return StateSet(self.dims, kept, name or f"{self.name} minus {','.join(labels)}", self.notes)

    def with_states(self, extra: Sequence[ProductState], name: str | None = None) -> "StateSet":
        return StateSet(self.dims, self.states + tuple(extra), name or self.name, self.notes)


def stopper(d: int) -> ProductState:
    """All-ones product state on three ``d``-level parties."""
    if d < 2:
        raise DomainError(f"stopper needs d >= 2, got {d}")
    one = ones_ket(d)
    return ProductState((one, one, one), "S")


def product_inner(p: ProductState, q: ProductState) -> complex:
    """``<p|q>`` computed factor by factor."""
    if p.dims != q.dims:
        raise DomainError(f"dimension mismatch {p.dims} vs {q.dims}")
    out = 1 + 0j
    for a, b in zip(p.factors, q.factors):
        out *= complex(np.vdot(a, b))
    return out
