"""Light-cone buildup of cooperativity (c = 1 units).

Before light has crossed an atom pair, that pair's entry in the retarded
decay matrix is silent; once ct exceeds the largest pair distance the
matrix equals the static kernel and the collective regime is fully
established (cooperation time ~ R0 / c).
"""

import numpy as np

from dickesim import (
    CloudParams,
    build_decay_matrix,
    decay_matrix_retarded,
    max_pair_distance,
    min_pair_distance,
    sample_cloud,
)

params = CloudParams(n_atoms=32, k0=1.0, r0=5.0, gamma1=1.0, seed=8)
cloud = sample_cloud(params)
dmin, dmax = min_pair_distance(cloud), max_pair_distance(cloud)
static = build_decay_matrix(cloud).gamma
print(f"N = {params.n_atoms}, k0*R0 = {params.k0r0:g}; "
      f"pair distances in [{dmin:.2f}, {dmax:.2f}] / k0")

print("\n      ct / R0    max offdiag    max |retarded - static|")
for ct in (0.0, 0.02 * dmin, 0.5 * dmin, 2.0, 5.0, dmax, 2 * dmax):
    g = decay_matrix_retarded(cloud, ct, frame="beta")
    off = np.max(np.abs(g - np.diag(np.diagonal(g))))
    diff = np.max(np.abs(g - static))
    print(f"  {ct / params.r0:11.4g}  {off:12.4g}  {diff:14.4g}")

print("\ndiagonal at exactly ct = 0 is gamma1/2 (step-function boundary value):",
      decay_matrix_retarded(cloud, 0.0)[0, 0].real)
print("diagonal for any ct > 0 is gamma1:",
      decay_matrix_retarded(cloud, 1e-6)[0, 0].real)

# the pair-aligned reduction agrees with an explicit spherical product grid
g1 = decay_matrix_retarded(cloud, 3.0, method="aligned")
g2 = decay_matrix_retarded(cloud, 3.0, n_quad=192, method="global")
print(f"\naligned vs explicit sphere grid at ct = 3/k0: "
      f"max diff {np.max(np.abs(g1 - g2)):.2e}")
