"""Build the pair decay kernel for one cloud and look at its spectrum.

A cloud of N atoms sharing one absorbed photon decays through the
Hermitian matrix gamma1 * F, where F couples each atom pair through
sinc(k0 d) times the incident-photon phase.  Most eigenvalues are small
(subradiant); a handful of superradiant modes carry rates far above the
single-atom gamma1.  At high optical depth N/(k0 R0)^2 the timed
symmetric state concentrates on the fastest of them; at moderate depth
its weight spreads over the whole superradiant band.
"""

import numpy as np

from dickesim import (
    CloudParams,
    build_decay_matrix,
    collective_rate,
    initial_state,
    sample_cloud,
)

params = CloudParams(n_atoms=256, k0=1.0, r0=4.0, gamma1=1.0, seed=42)
cloud = sample_cloud(params)
print(f"cloud: N = {params.n_atoms}, k0*R0 = {params.k0r0:g}, "
      f"optical depth N/(k0*R0)^2 = {params.optical_depth:.3g}")

dm = build_decay_matrix(cloud)
evals = dm.eigenvalues
print(f"decay matrix: Hermitian, trace = {np.trace(dm.gamma).real:.6g} (= N * gamma1)")
print(f"eigenvalue range: [{evals[0]:.3e}, {evals[-1]:.4g}] in units of gamma1")
print(f"eigenvalues above gamma1: {np.sum(evals > 1.0)} of {params.n_atoms}")

gcol = collective_rate(cloud)
print(f"\nsymmetric-state rate gamma_col = {gcol:.4g} gamma1")
print(f"large-sample form N/(k0*R0)^2 = {params.optical_depth:.4g} gamma1")
print(f"cooperative excess gamma_col - gamma1 = {gcol - 1.0:.4g} gamma1")

# weight of the timed symmetric state on the decay eigenmodes
state = initial_state(cloud)
weights = np.abs(dm.eigenvectors.conj().T @ state.beta) ** 2
order = np.argsort(weights)[::-1]
print("\ntop eigenmode overlaps of the timed symmetric state:")
for k in order[:5]:
    print(f"  rate {evals[k]:8.4g} gamma1   weight {weights[k]:.4f}")
print(f"weight outside the dominant mode: {1.0 - weights[order[0]]:.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.hist(evals, bins=60, log=True)
    ax1.set_xlabel("eigenvalue / gamma1")
    ax1.set_ylabel("count")
    ax1.set_title("decay-rate spectrum")
    ax2.semilogy(evals, weights, ".", ms=3)
    ax2.set_xlabel("eigenvalue / gamma1")
    ax2.set_ylabel("overlap weight")
    ax2.set_title("timed-state decomposition")
    fig.tight_layout()
    fig.savefig("demo01_spectrum.png", dpi=130)
    print("\nwrote demo01_spectrum.png")
except ImportError:
    pass
