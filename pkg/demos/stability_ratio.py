"""Deficit over squared distance to the bubble manifold near the manifold.

Small perturbations of the bubble are projected back onto the manifold and
the ratio deficit / distance^2 is compared with the spectral-gap bound.

Run with ``python demos/stability_ratio.py`` (about half a minute).
"""

from rellich_sobolev import derive_constants, local_ratio_study

p = derive_constants(5, 0.5)
study = local_ratio_study(p, sample_count=10, seed=0)
print(f"nu2={study.nu2:.6f} nu3={study.nu3:.6f} bound={study.bound:.6f}")
print(f"smallest sampled ratio {study.min_ratio:.6f} (passed: {study.passed})")
for s in sorted(study.samples, key=lambda s: s.ratio)[:5]:
    print(f"  dir {s.direction_id:>3} eps {s.epsilon:.3f} ratio {s.ratio:.6f} lam* {s.lam_star:.6f}")
