"""Low eigenvalues of the linearized problem in the first angular sectors.

In the radial sector the first value is 1 (the bubble itself) and the second
is 2**-1 (the scaling direction); every other value lies strictly above.

Run with ``python demos/spectrum.py``.
"""

from rellich_sobolev import derive_constants
from rellich_sobolev.spectrum import sector_spectrum

p = derive_constants(5, 0.5)
print(f"N=5 mu=0.5, 2**-1 = {p.two_crit - 1:.6f}")
for k in range(4):
    res = sector_spectrum(k, p, count=4)
    vals = ", ".join(f"{v:.8f}" for v in res.eigenvalues)
    print(f"sector k={k}: {vals}")
