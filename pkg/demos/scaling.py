"""Timings of the three verifiers as d grows.

Run: python3 demos/scaling.py [dmax]
"""

from __future__ import annotations

import sys
import time

from upbv.families import expected_size, upb_ddd
from upbv.lemmas import certify
from upbv.opm import is_trivial_opm
from upbv.unextend import is_upb

dmax = int(sys.argv[1]) if len(sys.argv) > 1 else 6
print(f"{'d':>2} {'size':>5} {'upb':>10} {'t_upb':>7} {'opm dim':>7} {'t_opm':>7} {'cert':>5} {'t_cert':>7}")
for d in range(3, dmax + 1):
    s = upb_ddd(d)
    assert len(s) == expected_size(d)
    t0 = time.perf_counter()
    status = is_upb(s).status.value if d <= 5 else "skipped"
    t1 = time.perf_counter()
    v = is_trivial_opm(s, "BC")
    t2 = time.perf_counter()
    if d <= 5:
        cert, _ = certify(s, "BC")
        res = str(cert.residual_dim)
    else:
        res = "-"
    t3 = time.perf_counter()
    print(f"{d:>2} {len(s):>5} {status:>10} {t1 - t0:>7.2f} {v.dim:>7} {t2 - t1:>7.2f} {res:>5} {t3 - t2:>7.2f}")
