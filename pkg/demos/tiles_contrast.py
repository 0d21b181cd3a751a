"""Contrast case: the 3x4 tiles set is a UPB, yet Bob alone can measure
nontrivially, namely {|3><3|, I - |3><3|}.

Run: python3 demos/tiles_contrast.py
"""

from __future__ import annotations

import numpy as np

from upbv.families import tiles_34
from upbv.linalg import params_to_hermitian
from upbv.opm import is_trivial_opm
from upbv.unextend import is_upb

s = tiles_34()
print(f"{s.name}: {len(s)} states, unextendible: {is_upb(s).status.value}")

for party in ("A", "B"):
    v = is_trivial_opm(s, party)
    print(f"party {party} measures alone: {v.kind.value}, solution dim {v.dim}")

v = is_trivial_opm(s, "B")
target = np.zeros(16)
target[3] = 1.0
coef = v.basis @ target
op = params_to_hermitian(coef @ v.basis)
print("projection of |3><3| onto the solution space:")
print(np.round(op.real, 12) + 0.0)  # + 0.0 folds -0 into 0
