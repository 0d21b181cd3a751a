from __future__ import annotations

import itertools

import numpy as np
import pytest

from upbv.errors import DomainError, RuleNotApplicable
from upbv.families import B1_INDEX_READING, upb_ddd
from upbv.linalg import hermitian_param_rows, identity_params, root_of_unity
from upbv.lemmas import (
    Certificate,
    Knowledge,
    Step,
    certify,
    check_layer_overlaps,
    check_soundness,
    lemma1_oracle,
    lemma2_oracle,
    r1_block_zeros,
    r2_block_trivial,
    r3_restrict,
    r4_merge,
)
from upbv.opm import MeasuredSubset, build_constraints, solution_space
from upbv.states import ProductState, StateSet, basis_ket, eta, xi

e3 = lambda i: basis_ket(3, i)  # noqa: E731


def ix(b, c, d=3):
    return b * d + c


# d = 3, measured BC; index bc = 3b + c
A1 = [ix(0, 0), ix(0, 1)]
A2 = [ix(0, 2), ix(1, 2)]
MID = [ix(1, 1)]
B2 = [ix(1, 0), ix(2, 0)]
B1 = [ix(2, 1), ix(2, 2)]
B3 = [ix(0, 1), ix(0, 2), ix(1, 1), ix(1, 2)]
FIVE_BLOCKS_333 = [A1, A2, MID, B2, B1]
FIVE_BLOCKS_444 = [[0, 1, 2], [3, 7, 11], [5, 6, 9, 10], [4, 8, 12], [13, 14, 15]]


def _step1_knowledge():
    # zeros between the four outer tile supports
    k = Knowledge(9)
    for P, Q in itertools.combinations([A1, A2, B2, B1], 2):
        k.mark_zero((p, q) for p in P for q in Q)
    return k


@pytest.fixture(scope="module")
def cert333():
    return certify(upb_ddd(3), "BC")


@pytest.fixture(scope="module")
def cert444():
    return certify(upb_ddd(4), "BC")


def test_knowledge_basics():
    k = Knowledge(4)
    assert k.mark_zero([(2, 1), (1, 2)]) == [(1, 2)]
    assert k.zero[1, 2] and k.zero[2, 1]
    with pytest.raises(DomainError):
        k.mark_zero([(0, 0)])
    k.union(3, 1)
    assert k.classes() == [[0], [1, 3], [2]]
    with pytest.raises(DomainError):
        Knowledge(0)


def test_r1_tile_blocks():
    conds = [(np.kron(e3(0), eta(3, 0, i)), np.kron(eta(3, 0, j), e3(2))) for i in range(2) for j in range(2)]
    k0 = Knowledge(9)
    k = r1_block_zeros(k0, A1, A2, conds)
    assert all(k.zero[s, t] and k.zero[t, s] for s in A1 for t in A2)
    assert k.zero.sum() == 2 * len(A1) * len(A2)
    assert not k0.zero.any()  # inputs are never mutated


def test_r1_singleton_row():
    x = np.zeros(9)
    x[ix(1, 1)] = 1
    conds = [(x, np.kron(e3(0), eta(3, 0, i))) for i in range(2)]
    k = r1_block_zeros(Knowledge(9), MID, A1, conds)
    assert k.zero[ix(1, 1), ix(0, 0)] and k.zero[ix(1, 1), ix(0, 1)]


def test_r1_guards():
    k = Knowledge(9)
    conds = [(np.kron(e3(0), eta(3, 0, 0)), np.kron(eta(3, 0, j), e3(2))) for j in range(2)]
    with pytest.raises(RuleNotApplicable):
        r1_block_zeros(k, A1, A2, conds)  # one left vector cannot span a 2-block
    with pytest.raises(RuleNotApplicable):
        r1_block_zeros(k, A1, A1, conds)
    full = [(np.kron(e3(0), eta(3, 0, i)), np.kron(eta(3, 0, j), e3(2))) for i in range(2) for j in range(2)]
    with pytest.raises(RuleNotApplicable):
        r1_block_zeros(k, A1, A2, full[:3])  # a missing cross condition


def test_r3_restrict_to_singleton():
    x = np.kron(xi(3, 0, 1), eta(3, 0, 0))
    assert set(np.flatnonzero(x)) == {ix(1, 0), ix(1, 1), ix(2, 0), ix(2, 1)}
    for i in range(2):
        y = np.kron(e3(0), eta(3, 0, i))
        xr, yr = r3_restrict(_step1_knowledge(), (x, y))
        assert list(np.flatnonzero(xr)) == [ix(1, 1)]
        assert np.array_equal(yr, y)


def test_r3_stopper_restricts_to_eta_xi(cert333):
    k = cert333[0].phase1()
    k.mark_zero([(ix(0, 0), ix(0, 1))])
    stop = np.ones(9)
    for i, j in itertools.product(range(2), repeat=2):
        y = np.kron(eta(3, 0, i), xi(3, 0, j))
        xr, _ = r3_restrict(k, (stop, y))
        assert np.allclose(xr, np.kron(eta(3, 0, 0), xi(3, 0, 0)))


def test_r3_empty_knowledge_is_identity():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=9), rng.normal(size=9)
    xr, yr = r3_restrict(Knowledge(9), (x, y))
    assert np.array_equal(xr, x) and np.array_equal(yr, y)


def _b3_basis():
    return [np.kron(eta(3, 0, i), xi(3, 0, j)) for i in range(2) for j in range(2)]


def test_r2_block_b3(cert333):
    k = cert333[0].phase1()
    k.mark_zero([(ix(0, 0), ix(0, 1))])
    out = r2_block_trivial(k, B3, _b3_basis(), pivot=ix(0, 1))
    assert frozenset(B3) in out.resolved
    assert all(out.zero[a, b] for a in B3 for b in B3 if a != b)
    assert len({out.find(i) for i in B3}) == 1
    assert frozenset(B3) not in k.resolved


def test_r2_guards(cert333):
    k = cert333[0].phase1()
    with pytest.raises(RuleNotApplicable):
        # pivot 02 is not known to vanish against 11 or 12 yet
        r2_block_trivial(Knowledge(9), B3, _b3_basis(), pivot=ix(0, 2))
    with pytest.raises(RuleNotApplicable):
        r2_block_trivial(k, B3, _b3_basis(), pivot=ix(2, 2))
    # the standard basis meets the pivot in a single vector
    std = [basis_ket(9, i) for i in A1]
    k2 = Knowledge(9)
    k2.mark_zero([(A1[0], A1[1])])
    with pytest.raises(RuleNotApplicable):
        r2_block_trivial(k2, A1, std, pivot=A1[0])
    with pytest.raises(RuleNotApplicable):
        r2_block_trivial(k2, A1, [np.kron(e3(0), eta(3, 0, 0))] * 2, pivot=A1[0])


@pytest.mark.parametrize("n", range(2, 9))
def test_fourier_meets_every_pivot(n):
    four = np.array([[root_of_unity(n, i * j) for j in range(n)] for i in range(n)])
    assert np.allclose(np.abs(four), 1)
    k = Knowledge(n)
    for t in range(n):
        k.mark_zero([(t, u) for u in range(n) if u != t])
        r2_block_trivial(k, range(n), list(four), pivot=t)


def _resolved_a1_b3(cert333):
    k = cert333[0].phase1()
    k.mark_zero([(ix(0, 0), ix(0, 1))])
    k = r2_block_trivial(k, A1, [np.kron(e3(0), eta(3, 0, i)) for i in range(2)], pivot=ix(0, 0))
    return r2_block_trivial(k, B3, _b3_basis(), pivot=ix(0, 1))


def test_r4_merge(cert333):
    k = _resolved_a1_b3(cert333)
    out = r4_merge(k, A1, B3)
    assert len({out.find(i) for i in A1 + B3}) == 1
    assert r4_merge(out, B3, B3).pattern() == out.pattern()


def test_r4_guards(cert333):
    k = _resolved_a1_b3(cert333)
    k.mark_zero([(B1[0], B1[1])])
    k = r2_block_trivial(k, B1, [np.kron(e3(2), xi(3, 0, j)) for j in range(2)], pivot=ix(2, 1))
    with pytest.raises(RuleNotApplicable, match="disjoint"):
        r4_merge(k, A1, B1)
    with pytest.raises(RuleNotApplicable):
        r4_merge(k, A1, A2)  # A2 is not resolved


def test_certify_333_phase1_pattern(cert333):
    cert, residual = cert333
    assert cert.phase1().block_diagonal_with(FIVE_BLOCKS_333)
    assert cert.residual_dim == 1 and residual.dim == 1
    assert cert.steps[-1].rule == "R5"


def test_certify_444_phase1_pattern(cert444):
    cert, residual = cert444
    assert cert.phase1().block_diagonal_with(FIVE_BLOCKS_444)
    assert residual.dim == 1


@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("cut", ["BC", "CA", "AB"])
def test_soundness_ddd_families(d, cut):
    s = upb_ddd(d)
    cert, residual = certify(s, cut, validate=False)
    numeric = solution_space(build_constraints(s, MeasuredSubset.of(cut, s.dims)))
    assert check_soundness(cert, numeric) == []
    assert residual.dim == numeric.dim == 1


def test_soundness_nontrivial_set():
    states = [
        ProductState(tuple(basis_ket(2, i) for i in idx), "".join(map(str, idx)))
        for idx in itertools.product(range(2), repeat=3)
    ]
    s = StateSet((2, 2, 2), states, "computational")
    cert, residual = certify(s, "BC")
    numeric = solution_space(build_constraints(s, MeasuredSubset.of("BC", s.dims)))
    assert residual.dim == numeric.dim == 4
    assert check_soundness(cert, numeric) == []


def test_soundness_detects_a_false_zero(cert333):
    cert, residual = cert333
    bad = Certificate.from_json(cert.to_json())
    bad.steps.append(Step("R1", (), (0,), (1,), ((0, 1),)))
    free = solution_space(build_constraints(StateSet((3, 3, 3), []), MeasuredSubset.of("BC", (3, 3, 3))))
    assert check_soundness(bad, free)


def test_replay_and_json_round_trip(cert444):
    cert, _ = cert444
    back = Certificate.from_json(cert.to_json())
    assert back.replay().pattern() == cert.replay().pattern()
    assert back.residual_dim == cert.residual_dim and back.gap_ratio == cert.gap_ratio
    assert back.notes == cert.notes
    with pytest.raises(DomainError):
        Certificate.from_json('{"format": "other"}')


def test_certificate_records_index_reading(cert333):
    assert B1_INDEX_READING in cert333[0].notes
    assert f"# note: {B1_INDEX_READING}" in cert333[0].to_text()


def test_text_format(cert333):
    lines = cert333[0].to_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    assert len(body) == len(cert333[0].steps)
    for ln in body:
        fields = ln.split(" | ")
        assert fields[0] in {"R1", "R2", "R3", "R4", "R5"}
        assert fields[1].startswith("states: ") and fields[2].startswith("S: ")
        assert fields[3].startswith("T/basis: ") and fields[4].startswith("delta: ")
        assert fields[4].endswith(" merges")


def test_knowledge_only_grows(cert444):
    cert, _ = cert444
    prev = cert.replay(0)
    for n in range(1, len(cert.steps) + 1):
        cur = cert.replay(n)
        assert (cur.zero | prev.zero == cur.zero).all()
        for members in prev.classes():
            assert len({cur.find(i) for i in members}) == 1
        prev = cur


def test_certify_needs_three_parties(t34):
    with pytest.raises(DomainError):
        certify(t34, "B")


def test_lemma_oracles():
    r1 = lemma1_oracle(200, 8)
    r2 = lemma2_oracle(200, 8)
    assert r1.passed and r1.violations == 0 and r1.max_error <= 1e-9
    assert r2.passed and r2.violations == 0 and r2.max_error <= 1e-9
    with pytest.raises(DomainError):
        lemma1_oracle(1, 13)


def test_identity_meets_lemma_hypotheses():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    left = np.repeat(q[:3], 5, axis=0)
    right = np.tile(q[3:], (3, 1))
    assert np.abs(hermitian_param_rows(left, right) @ identity_params(8)).max() < 1e-12


def test_layer_overlaps():
    r3 = check_layer_overlaps(3)
    assert r3.layers == (0,) and r3.min_modulus == pytest.approx(1.0)
    r5 = check_layer_overlaps(5)
    assert r5.layers == (0, 1) and r5.passed
    for d in range(3, 10):
        assert check_layer_overlaps(d).min_modulus > 1e-6
    with pytest.raises(DomainError):
        check_layer_overlaps(2)
