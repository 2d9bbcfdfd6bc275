"""The bubble attains the sharp constant and solves the Euler-Lagrange equation.

Run with ``python demos/equality_case.py``.
"""

import numpy as np

from rellich_sobolev import (derive_constants, equality_case_check, make_bubble,
                             relative_el_residual, sharp_constant_identity)

for N, mu in [(5, 0.5), (6, 1.0), (8, 2.0)]:
    p = derive_constants(N, mu)
    lhs, rhs, gap = equality_case_check(p)
    value = sharp_constant_identity(p)
    r = np.geomspace(1e-2, 1e2, 9)
    res = relative_el_residual(make_bubble(p).profile, p, r).max()
    print(f"N={N} mu={mu}: S_mu={p.s_mu:.10f} ||U||^(2-4/2**)={value:.10f}")
    print(f"    energy {lhs:.12f} vs S_mu*||U||_2**^2 {rhs:.12f} (gap {gap:.1e})")
    print(f"    max relative Euler-Lagrange residual on [1e-2, 1e2]: {res:.1e}")
