"""Dense complex linear algebra with explicit tolerance handling.

Vectors and matrices are plain numpy arrays.  Multipartite indices are
flattened with the last party varying fastest, so ``|i>_B |j>_C`` sits at
``i * d_C + j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "SolutionSpace",
    "root_of_unity",
    "kron",
    "inner",
    "rank",
    "nullspace_real",
    "nullspace_complex",
    "partial_transpose",
    "eig_hermitian",
    "hermitian_to_params",
    "params_to_hermitian",
    "hermitian_param_rows",
    "identity_params",
    "r_factor",
]


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances used by every check in the package."""

    zero: float = 1e-9
    rank: float = 1e-9
    psd: float = 1e-10
    gap_min: float = 1e6


DEFAULT_TOL = Tolerances()

# discarded singular values below this fraction of the largest count as exact zeros
_EXACT_ZERO = 1e-14


@dataclass(frozen=True)
class SolutionSpace:
    """Nullspace of a real constraint system over Hermitian parameters.

    ``basis`` has shape ``(dim, m*m)``; its rows are orthonormal parameter
    vectors in the layout of :func:`hermitian_to_params`.
    """

    dim: int
    basis: np.ndarray
    gap_ratio: float

    @property
    def m(self) -> int:
        return math.isqrt(self.basis.shape[1])

    def operators(self) -> list[np.ndarray]:
        """Basis elements decoded as Hermitian matrices."""
        return [params_to_hermitian(p) for p in self.basis]

    def project(self, params: np.ndarray) -> np.ndarray:
        """Orthogonal projection of a parameter vector onto the space."""
        params = np.asarray(params, dtype=float)
        return self.basis.T @ (self.basis @ params)


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains NaN or Inf")


def root_of_unity(n: int, k: int = 1) -> complex:
    """Return ``exp(2*pi*i*k/n)``.

    Exact values are returned when ``k/n`` is a multiple of 1/4 so that the
    real Fourier vectors stay exactly real.
    """
    if n < 1:
        raise DomainError(f"root_of_unity needs n >= 1, got {n}")
    k %= n
    if 4 * k % n == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * k // n]
    return complex(np.exp(2j * np.pi * k / n))


def kron(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product of local vectors, last factor fastest."""
    if len(factors) == 0:
        raise DomainError("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=complex).ravel()
    for f in factors[1:]:
        out = np.multiply.outer(out, np.asarray(f, dtype=complex).ravel()).ravel()
    return out


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """``<u|v>``, conjugate-linear in ``u``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DomainError(f"inner: dimension mismatch {u.shape} vs {v.shape}")
    return complex(np.vdot(u, v))


def _svdvals(a: np.ndarray) -> np.ndarray:
    if a.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(a)


def rank(a: np.ndarray, rel_tol: float = DEFAULT_TOL.rank) -> int:
    """Number of singular values above ``rel_tol * sigma_max``."""
    if rel_tol <= 0:
        raise DomainError("rel_tol must be positive")
    a = np.atleast_2d(np.asarray(a))
    _check_finite(a, "matrix")
    s = _svdvals(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def _split_spectrum(s: np.ndarray, ncols: int, rel_tol: float) -> tuple[int, float]:
    """Rank and gap ratio from singular values padded to ``ncols``."""
    s = np.concatenate([s, np.zeros(max(0, ncols - s.size))])[:ncols]
    if ncols == 0 or s[0] == 0.0:
        return 0, math.inf
    r = int(np.count_nonzero(s > rel_tol * s[0]))
    if r == ncols:
        return r, math.inf
    largest_dropped = s[r]
    if largest_dropped < _EXACT_ZERO * s[0]:
        return r, math.inf
    return r, float(s[r - 1] / largest_dropped)


def nullspace_real(a: np.ndarray, rel_tol: float = DEFAULT_TOL.rank) -> tuple[np.ndarray, float]:
    """Orthonormal basis of the numerical nullspace of a real matrix.

    Returns ``(basis, gap_ratio)`` where ``basis`` has one basis vector per
    row.  ``gap_ratio`` is the smallest kept singular value over the largest
    discarded one (``inf`` when nothing, or only values below
    ``1e-14 * sigma_max``, was discarded).
    """
    if rel_tol <= 0:
        raise DomainError("rel_tol must be positive")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DomainError("nullspace_real expects a 2-D matrix")
    _check_finite(a, "matrix")
    nrows, ncols = a.shape
    if nrows == 0 or not a.any():
        return np.eye(ncols), math.inf
    _, s, vt = scipy.linalg.svd(a, full_matrices=nrows < ncols, lapack_driver="gesdd")
    r, gap = _split_spectrum(s, ncols, rel_tol)
    return vt[r:].copy(), gap


def nullspace_complex(a: np.ndarray, rel_tol: float = DEFAULT_TOL.rank) -> np.ndarray:
    """Orthonormal nullspace basis of a complex matrix, one vector per row."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    nrows, ncols = a.shape
    if nrows == 0 or not a.any():
        return np.eye(ncols, dtype=complex)
    _, s, vt = scipy.linalg.svd(a, full_matrices=True)
    r, _ = _split_spectrum(s, ncols, rel_tol)
    return vt[r:].conj()


def r_factor(chunks, ncols: int) -> np.ndarray:
    """Triangular factor R of a tall matrix supplied as row chunks.

    ``A = QR`` shares singular values and right singular vectors with ``R``,
    so large constraint systems never need to be held in memory at once.
    """
    r = np.zeros((0, ncols))
    for chunk in chunks:
        chunk = np.asarray(chunk, dtype=float)
        if chunk.shape[0] == 0:
            continue
        stacked = np.vstack([r, chunk])
        if stacked.shape[0] <= ncols:
            r = stacked
            continue
        r = scipy.linalg.qr(stacked, mode="r", overwrite_a=True, check_finite=False)[0][:ncols]
    return r


def _parse_mask(dims: Sequence[int], mask) -> list[int]:
    n = len(dims)
    parties = sorted({int(p) for p in mask})
    if not parties or len(parties) >= n or parties[0] < 0 or parties[-1] >= n:
        raise DomainError(f"party mask {mask!r} must be a nonempty proper subset of 0..{n - 1}")
    return parties


def partial_transpose(rho: np.ndarray, dims: Sequence[int], party_mask) -> np.ndarray:
    """Transpose the indices of the parties in ``party_mask``."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    total = math.prod(dims)
    if rho.shape != (total, total):
        raise DomainError(f"rho has shape {rho.shape}, expected {(total, total)}")
    parties = _parse_mask(dims, party_mask)
    n = len(dims)
    t = rho.reshape(dims + dims)
    axes = list(range(2 * n))
    for p in parties:
        axes[p], axes[n + p] = axes[n + p], axes[p]
    return t.transpose(axes).reshape(total, total)


def eig_hermitian(h: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("eig_hermitian expects a square matrix")
    _check_finite(h, "matrix")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.conj().T).max(initial=0.0) > tol * scale:
        raise DomainError("matrix is not Hermitian")
    return np.linalg.eigvalsh(h)


def _triu(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(m, 1)


def hermitian_to_params(h: np.ndarray) -> np.ndarray:
    """Real parameter vector: diagonal first, then (Re, Im) of each i<j."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError("expected a square matrix")
    m = h.shape[0]
    if not np.allclose(h, h.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(h).max(initial=0.0))):
        raise DomainError("matrix is not Hermitian")
    iu = _triu(m)
    upper = h[iu]
    out = np.empty(m * m)
    out[:m] = np.real(np.diag(h))
    out[m::2] = upper.real
    out[m + 1 :: 2] = upper.imag
    return out


def params_to_hermitian(params: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hermitian_to_params`; the result is exactly Hermitian."""
    params = np.asarray(params, dtype=float).ravel()
    m = math.isqrt(params.size)
    if m * m != params.size or m == 0:
        raise DomainError(f"parameter count {params.size} is not a positive perfect square")
    iu = _triu(m)
    h = np.zeros((m, m), dtype=complex)
    upper = params[m::2] + 1j * params[m + 1 :: 2]
    h[iu] = upper
    h[iu[1], iu[0]] = upper.conj()
    h[np.diag_indices(m)] = params[:m]
    return h


def identity_params(m: int) -> np.ndarray:
    p = np.zeros(m * m)
    p[:m] = 1.0
    return p


def hermitian_param_rows(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Real constraint rows for ``<x_k|E|y_k> = 0`` over Hermitian ``E``.

    ``left`` and ``right`` have shape ``(P, m)``.  Each pair contributes
    two rows (real and imaginary part), interleaved, for ``2P`` rows of
    length ``m*m``.
    """
    left = np.atleast_2d(np.asarray(left, dtype=complex))
    right = np.atleast_2d(np.asarray(right, dtype=complex))
    npairs, m = left.shape
    c = left.conj()[:, :, None] * right[:, None, :]
    iu = _triu(m)
    coeff = np.empty((npairs, m * m), dtype=complex)
    coeff[:, :m] = c[:, np.arange(m), np.arange(m)]
    cu = c[:, iu[0], iu[1]]
    cl = c[:, iu[1], iu[0]]
    coeff[:, m::2] = cu + cl
    coeff[:, m + 1 :: 2] = 1j * (cu - cl)
    rows = np.empty((2 * npairs, m * m))
    rows[0::2] = coeff.real
    rows[1::2] = coeff.imag
    return rows
