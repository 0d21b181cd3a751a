from __future__ import annotations

import numpy as np
import pytest

from upbv.entangle import (
    NORMALIZATION_NOTE,
    DensityMatrix,
    bipartitions,
    cut_label,
    ppt_report,
    range_entanglement_certificate,
    schmidt_rank,
    span_projector,
    upb_mixed_state,
)
from upbv.errors import DomainError, PreconditionError
from upbv.families import complement_phi_3, cyclic_shift, upb_ddd
from upbv.states import ProductState, StateSet, basis_ket


@pytest.fixture(scope="module")
def rho333():
    return upb_mixed_state(upb_ddd(3))


@pytest.fixture(scope="module")
def rho444():
    return upb_mixed_state(upb_ddd(4))


def _perm_matrix(dims):
    # |abc> -> |bca>, the cyclic relabeling of parties
    d = dims[0]
    n = d**3
    p = np.zeros((n, n))
    for a in range(d):
        for b in range(d):
            for c in range(d):
                p[(b * d + c) * d + a, (a * d + b) * d + c] = 1
    return p


def test_span_projector_333(s333):
    p = span_projector(s333)
    assert p.shape == (27, 27)
    assert np.abs(p @ p - p).max() <= 1e-9
    assert np.linalg.matrix_rank(p, tol=1e-9) == 19
    for st in s333:
        v = st.vector()
        assert np.allclose(p @ v, v)


def test_span_projector_single_state():
    k = basis_ket(2, 0)
    s = StateSet((2, 2, 2), [ProductState((k, k, k), "000")])
    expected = np.zeros((8, 8))
    expected[0, 0] = 1
    assert np.allclose(span_projector(s), expected)


def test_span_projector_rejects_non_orthogonal():
    k = lambda i: basis_ket(2, i)  # noqa: E731
    s = StateSet((2, 2), [ProductState((k(0), k(0)), "a"), ProductState((k(0), k(0) + k(1)), "b")])
    with pytest.raises(PreconditionError):
        span_projector(s)


@pytest.mark.parametrize("which", ["333", "444"])
def test_mixed_state_properties(which, rho333, rho444, s333, s444):
    rho, s = {"333": (rho333, s333), "444": (rho444, s444)}[which]
    assert abs(np.trace(rho.matrix) - 1) <= 1e-10
    eigs = rho.spectrum()
    assert eigs[0] >= -1e-10
    assert rho.rank() == 8
    nonzero = eigs[eigs > 1e-9]
    total = np.prod(s.dims)
    assert np.allclose(nonzero, 1 / (total - len(s)))
    assert np.abs(rho.matrix @ span_projector(s)).max() <= 1e-9
    assert rho.note == NORMALIZATION_NOTE


@pytest.mark.parametrize("which", ["333", "444"])
def test_ppt_all_cuts(which, rho333, rho444):
    rho = {"333": rho333, "444": rho444}[which]
    mins = ppt_report(rho)
    assert set(mins) == {"A|BC", "B|CA", "C|AB"}
    assert min(mins.values()) >= -1e-10


def test_mixed_state_cyclic_invariant(rho333):
    p = _perm_matrix(rho333.dims)
    assert np.abs(p @ rho333.matrix @ p.T - rho333.matrix).max() <= 1e-10
    # consistency of the permutation with the family's own shift
    s = upb_ddd(3)
    assert np.allclose(span_projector(cyclic_shift(s)), span_projector(s))


def test_maximally_mixed_ppt():
    rho = DensityMatrix.maximally_mixed((2, 3, 2))
    for v in ppt_report(rho).values():
        assert v == pytest.approx(1 / 12)


def test_extendible_set_refused(s333):
    with pytest.raises(PreconditionError):
        upb_mixed_state(s333.without("S"))


def test_density_matrix_validation():
    with pytest.raises(DomainError):
        DensityMatrix((2,), np.eye(2))
    with pytest.raises(DomainError):
        DensityMatrix((2,), np.array([[1.5, 0], [0, -0.5]]))
    with pytest.raises(DomainError):
        DensityMatrix((2,), np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(DomainError):
        DensityMatrix((2, 2), np.eye(2) / 2)


def test_bipartitions_and_labels():
    assert bipartitions(3) == [(0,), (1,), (2,)]
    assert [cut_label(s, 3) for s in bipartitions(3)] == ["A|BC", "B|CA", "C|AB"]
    assert bipartitions(2) == [(0,)]
    assert len(bipartitions(4)) == 7


def test_range_certificate(s333, s555):
    c = range_entanglement_certificate(s333)
    assert c.certified and "not fully separable" in c.statement
    assert "not decided" in c.statement
    assert range_entanglement_certificate(s555).certified
    refused = range_entanglement_certificate(s333.without("S"))
    assert not refused.certified and refused.statement.startswith("refused")


def test_schmidt_rank_examples():
    phi = complement_phi_3()
    assert schmidt_rank(phi[0].vector, (3, 3, 3), (0,)) == 1
    k = basis_ket(2, 0)
    v = np.kron(np.kron(k, k), k)
    for cut in [(0,), (1,), (2,), (0, 2)]:
        assert schmidt_rank(v, (2, 2, 2), cut) == 1
    bell = np.array([1, 0, 0, 1.0])
    assert schmidt_rank(bell, (2, 2), (0,)) == 2
    with pytest.raises(DomainError):
        schmidt_rank(np.zeros(4), (2, 2), (0,))
    with pytest.raises(DomainError):
        schmidt_rank(bell, (2, 2), (0, 1))


def test_complement_vectors_orthogonal(s333):
    vecs = s333.vectors()
    for c in complement_phi_3():
        assert np.abs(vecs.conj() @ c.vector).max() <= 1e-10
        assert schmidt_rank(c.vector, (3, 3, 3), c.cut) == 1
