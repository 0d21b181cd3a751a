"""Exact-arithmetic cross-check of solution-space dimensions.

The families used here have integer coordinates, so the constraint rows can
be rebuilt over the rationals without touching the package's own row
assembly or its floating-point rank decisions.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from upbv.opm import is_trivial_opm


def _integer_factors(s):
    out = []
    for st in s:
        fs = []
        for f in st.factors:
            assert np.allclose(f.imag, 0) and np.allclose(f.real, np.round(f.real))
            fs.append([int(round(v)) for v in f.real])
        out.append(fs)
    return out


def _kron(vs):
    out = [1]
    for v in vs:
        out = [a * b for a in out for b in v]
    return out


def _exact_rows(s, measured):
    facs = _integer_factors(s)
    m = math.prod(s.dims[p] for p in measured)
    off = list(itertools.combinations(range(m), 2))
    rows = []
    for a, b in itertools.combinations(range(len(facs)), 2):
        ov = 1
        for p in range(s.nparties):
            if p not in measured:
                ov *= sum(x * y for x, y in zip(facs[a][p], facs[b][p]))
        if ov == 0:
            continue
        x = _kron([facs[a][p] for p in measured])
        y = _kron([facs[b][p] for p in measured])
        # real vectors: <x|E|y> = sum_i x_i y_i h_ii + sum_{i<j} (x_i y_j + x_j y_i) re + i (x_i y_j - x_j y_i) im
        re = [x[i] * y[i] for i in range(m)] + [0] * (2 * len(off))
        im = [0] * (m + 2 * len(off))
        for n, (i, j) in enumerate(off):
            re[m + 2 * n] = x[i] * y[j] + x[j] * y[i]
            im[m + 2 * n + 1] = x[i] * y[j] - x[j] * y[i]
        rows += [re, im]
    return rows, m * m


def _exact_dim(s, measured):
    rows, ncols = _exact_rows(s, measured)
    if not rows:
        return ncols
    mat = DomainMatrix([[QQ(v) for v in r] for r in rows], (len(rows), ncols), QQ)
    return ncols - mat.rank()


def test_tiles_b_exact(t34):
    assert _exact_dim(t34, (1,)) == 2
    assert is_trivial_opm(t34, "B").dim == 2


def test_tiles_a_exact(t34):
    assert _exact_dim(t34, (0,)) == is_trivial_opm(t34, "A").dim == 1


@pytest.mark.parametrize("measured", [(1, 2), (0, 2), (0, 1)])
def test_upb333_exact(s333, measured):
    assert _exact_dim(s333, measured) == 1
