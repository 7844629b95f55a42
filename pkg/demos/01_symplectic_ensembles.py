"""Tour of the symplectic ensemble sampler.

Samples self-dual random matrices, verifies the structural invariants
(Hermiticity, self-duality, Kramers doublets), then pools unfolded
spectra and compares the spacing histogram against the classical
surmises.  Everything prints as text; no plotting dependencies.

Run:  python3 demos/01_symplectic_ensembles.py
"""

import numpy as np

from gsescatter import (
    eigen_kramers,
    nnsd,
    number_variance,
    rng_stream,
    sample_gse,
    semicircle_radius,
    symplectic_check,
    unfold_semicircle,
    wigner_surmise,
)

N = 60          # quaternion dimension (matrix is 2N x 2N)
N_REALIZATIONS = 300
SEED = 2024

print("== structure of a single sample ==")
h = sample_gse(N, rng_stream(SEED, 0))
dense = h.to_dense()
print(f"dense shape {dense.shape}, Hermitian defect "
      f"{np.max(np.abs(dense - dense.conj().T)):.2e}")
print(f"self-duality check at 1e-12: {symplectic_check(h, tol=1e-12)}")
spec = eigen_kramers(h)
print(f"worst Kramers splitting: {spec.max_splitting:.2e} "
      f"({spec.max_rel_splitting:.2e} relative)")

print()
print("== pooled spacing statistics ==")
radius = semicircle_radius(2 * N)
unfolded = []
for i in range(N_REALIZATIONS):
    s = eigen_kramers(sample_gse(N, rng_stream(SEED, i)))
    unfolded.append(unfold_semicircle(s.collapsed, radius))
spacings_hist = nnsd(unfolded, bins=24, range_max=3.0)

gse = wigner_surmise("gse", spacings_hist.centers)
gue = wigner_surmise("gue", spacings_hist.centers)
print(f"{'s':>6} {'data':>8} {'gse':>8} {'gue':>8}")
for c, d, y4, y2 in zip(spacings_hist.centers, spacings_hist.density, gse.y, gue.y):
    print(f"{c:6.3f} {d:8.4f} {y4:8.4f} {y2:8.4f}")

l2_gse = np.sum((spacings_hist.density - gse.y) ** 2 * spacings_hist.widths)
l2_gue = np.sum((spacings_hist.density - gue.y) ** 2 * spacings_hist.widths)
print(f"\nL2 distance: vs gse {l2_gse:.4f}, vs gue {l2_gue:.4f} "
      f"(quartic repulsion wins)")

print()
print("== number variance (spectral rigidity) ==")
curve = number_variance(unfolded, lengths=np.arange(0.5, 4.1, 0.5),
                        rng=rng_stream(SEED, 10_000))
for length, val in zip(curve.x, curve.y):
    print(f"  window {length:4.1f}: variance {val:.3f}  (Poisson would be {length:.1f})")
