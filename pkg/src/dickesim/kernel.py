"""Decay kernel of the shared-photon problem.

The amplitude equations couple atoms j and j' through

    F(dr) = sinc(k0 |dr|) * exp(-i k0 n0 . dr),

the phase-rotated form of the isotropic sin(x)/x exchange kernel.  The
static decay matrix is gamma1 * F evaluated on all atom pairs; it is
Hermitian and positive semidefinite, with every diagonal entry exactly
gamma1.  The retarded variant multiplies the angular plane-wave average
by a light-cone step factor, so cooperativity between a pair switches on
only once light (c = 1) has had time to cross it.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .cloud import AtomicCloud, pair_distances
from .errors import NumericalDecompositionError, ParameterError

# Below this argument sin(x)/x is evaluated by Taylor series; the x**4
# term keeps the relative error under 1e-17 at the branch point.
_SINC_TAYLOR_CUTOFF = 1e-4


def sinc(x):
    """sin(x)/x with an exact x -> 0 limit (note: unnormalized sinc)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    if scalar:
        arr = arr.reshape(1)
    small = np.abs(arr) < _SINC_TAYLOR_CUTOFF
    out = np.sin(arr)
    np.divide(out, arr, out=out, where=~small)
    if np.any(small):
        xs = arr[small]
        out[small] = 1.0 - xs * xs / 6.0 * (1.0 - xs * xs / 20.0)
    return float(out[0]) if scalar else out


def kernel_F(dr, k0: float, n0) -> complex:
    """Pair coupling F for a single separation vector dr = r_j - r_j'."""
    if not k0 > 0:
        raise ParameterError(f"k0 must be positive, got {k0}")
    dr = np.asarray(dr, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    d = float(np.linalg.norm(dr))
    return complex(sinc(k0 * d) * np.exp(-1j * k0 * float(n0 @ dr)))


def kernel_matrix(cloud: AtomicCloud) -> np.ndarray:
    """N x N matrix F_jj' = F(r_j - r_j') in the phase-rotated frame."""
    p = cloud.params
    s = sinc_matrix(cloud)
    u = np.exp(-1j * p.k0 * cloud.n0_projections())
    f = s * np.outer(u, np.conj(u))
    # F(0) = 1 analytically; pin the diagonal against |e^{i phi}|^2 roundoff.
    np.fill_diagonal(f, 1.0)
    return f


def sinc_matrix(cloud: AtomicCloud) -> np.ndarray:
    """N x N real kernel sinc(k0 |r_j - r_j'|) (original, unrotated frame).

    Evaluated on the condensed pair list, then mirrored, so each distinct
    pair costs one sine.
    """
    if cloud.n_atoms == 1:
        return np.ones((1, 1))
    condensed = sinc(cloud.params.k0 * pdist(cloud.positions))
    s = squareform(condensed)
    np.fill_diagonal(s, 1.0)
    return s


def frame_phases(cloud: AtomicCloud) -> np.ndarray:
    """Diagonal phases e^{-i k0 n0 . r_j} mapping alpha to beta amplitudes."""
    return np.exp(-1j * cloud.params.k0 * cloud.n0_projections())


class DecayMatrix:
    """The decay operator gamma1 * F with its cached spectral form.

    The eigendecomposition is computed lazily on first use and reused by
    every subsequent evolution.  Eigenvalues more negative than
    -1e-10 * gamma1 raise :class:`NumericalDecompositionError`; small
    negative noise is clamped to zero for propagation.
    """

    HERMITICITY_TOL = 1e-12
    TRACE_TOL = 1e-10
    PSD_TOL = 1e-10

    def __init__(self, gamma: np.ndarray, gamma1: float, frame: str = "beta"):
        gamma = np.asarray(gamma, dtype=complex)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ParameterError(f"decay matrix must be square, got shape {gamma.shape}")
        self.gamma = gamma
        self.gamma1 = float(gamma1)
        self.frame = frame
        self._eigenvalues = None
        self._eigenvectors = None
        self._validate_cheap()

    @property
    def n_atoms(self) -> int:
        return self.gamma.shape[0]

    def _validate_cheap(self):
        g1 = self.gamma1
        herm_defect = float(np.max(np.abs(self.gamma - self.gamma.conj().T)))
        if herm_defect > self.HERMITICITY_TOL * g1:
            raise NumericalDecompositionError(
                "decay matrix is not Hermitian",
                details={"hermiticity_defect": herm_defect, "gamma1": g1},
            )
        diag = np.diagonal(self.gamma)
        if np.any(diag.real != g1) or np.any(diag.imag != 0.0):
            raise NumericalDecompositionError(
                "diagonal entries must equal gamma1 exactly",
                details={"max_diag_defect": float(np.max(np.abs(diag - g1)))},
            )
        trace = complex(np.trace(self.gamma))
        if abs(trace - self.n_atoms * g1) > self.TRACE_TOL * self.n_atoms * g1:
            raise NumericalDecompositionError(
                "trace does not equal N * gamma1",
                details={"trace": trace, "expected": self.n_atoms * g1},
            )

    def _decompose(self):
        if self._eigenvalues is not None:
            return
        try:
            evals, evecs = np.linalg.eigh(self.gamma)
        except np.linalg.LinAlgError as exc:
            raise NumericalDecompositionError(
                "eigendecomposition failed",
                details={
                    "n_atoms": self.n_atoms,
                    "frobenius_norm": float(np.linalg.norm(self.gamma)),
                    "reason": str(exc),
                },
            ) from exc
        min_eig = float(evals[0])
        if min_eig < -self.PSD_TOL * self.gamma1:
            raise NumericalDecompositionError(
                "decay matrix is not positive semidefinite",
                details={"min_eigenvalue": min_eig, "gamma1": self.gamma1},
            )
        self._eigenvalues = evals
        self._eigenvectors = evecs

    @property
    def eigenvalues(self) -> np.ndarray:
        """Raw eigenvalues, ascending, units 1/time."""
        self._decompose()
        return self._eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        """Orthonormal eigenvectors as columns, matching ``eigenvalues``."""
        self._decompose()
        return self._eigenvectors

    def evolution_rates(self) -> np.ndarray:
        """Eigenvalues with negative numerical noise clamped to zero."""
        return np.clip(self.eigenvalues, 0.0, None)

    def reconstruction_error(self) -> float:
        """max |V diag(lambda) V^dag - Gamma|."""
        v = self.eigenvectors
        rebuilt = (v * self.eigenvalues) @ v.conj().T
        return float(np.max(np.abs(rebuilt - self.gamma)))

    def expectation(self, vec: np.ndarray) -> float:
        """Rayleigh quotient <v|Gamma|v> / <v|v> (real for Hermitian Gamma)."""
        vec = np.asarray(vec, dtype=complex)
        num = np.vdot(vec, self.gamma @ vec).real
        den = np.vdot(vec, vec).real
        if den == 0.0:
            raise ParameterError("zero vector has no decay-rate expectation")
        return num / den


def build_decay_matrix(cloud: AtomicCloud, frame: str = "beta") -> DecayMatrix:
    """Assemble gamma1 * F on a cloud and attach its spectral decomposition.

    ``frame="beta"`` (default) uses the phase-rotated kernel F;
    ``frame="alpha"`` uses the real sinc kernel.  The two are related by
    conjugation with the diagonal phases of :func:`frame_phases` and share
    one spectrum.
    """
    if frame == "beta":
        f = kernel_matrix(cloud)
    elif frame == "alpha":
        f = sinc_matrix(cloud).astype(complex)
    else:
        raise ParameterError(f"unknown frame {frame!r}")
    return DecayMatrix(cloud.params.gamma1 * f, cloud.params.gamma1, frame=frame)


# ---------------------------------------------------------------------------
# Retarded (light-cone) decay matrix
# ---------------------------------------------------------------------------

def sphere_quadrature(n_polar: int, n_azimuth: int | None = None):
    """Product Gauss-Legendre x uniform-azimuth grid on the unit sphere.

    Returns (directions, weights) with weights summing to 1, so weighted
    sums realize the average over solid angle dOmega / 4pi.
    """
    if n_polar < 2:
        raise ParameterError(f"n_polar must be >= 2, got {n_polar}")
    if n_azimuth is None:
        n_azimuth = 2 * n_polar
    u, wu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    st = np.sqrt(1.0 - u**2)
    dirs = np.empty((n_polar * n_azimuth, 3))
    dirs[:, 0] = np.outer(st, np.cos(phi)).ravel()
    dirs[:, 1] = np.outer(st, np.sin(phi)).ravel()
    dirs[:, 2] = np.repeat(u, n_azimuth)
    weights = np.repeat(wu / 2.0, n_azimuth) / n_azimuth
    return dirs, weights


@lru_cache(maxsize=64)
def _leggauss_cached(order: int):
    return np.polynomial.legendre.leggauss(order)


# Composite panels: 24-node Gauss-Legendre resolves a phase of ~25 radians
# per panel to machine precision, so panel count grows linearly with k0*d.
_PANEL_NODES = 24
_PANEL_PHASE = 25.0


def _cos_integral(a: np.ndarray, u0: np.ndarray, min_nodes: int) -> np.ndarray:
    """integral_0^{u0} cos(a u) du by composite Gauss-Legendre panels.

    ``a`` and ``u0`` are 1-D arrays over pairs; entries are processed in
    groups of equal panel count, chunked to bound peak memory.
    """
    x, w = _leggauss_cached(_PANEL_NODES)
    out = np.zeros_like(a)
    phase = a * u0
    n_panels = np.maximum(
        int(np.ceil(min_nodes / _PANEL_NODES)),
        np.ceil(phase / _PANEL_PHASE).astype(int),
    )
    n_panels = np.maximum(n_panels, 1)
    for m in np.unique(n_panels):
        sel = np.flatnonzero(n_panels == m)
        # offsets of the m panel midpoints within [0, u0], panel width u0/m
        starts = np.arange(m) / m
        nodes = (starts[:, None] + (x[None, :] + 1.0) / (2.0 * m)).ravel()  # (m*K,)
        wts = np.tile(w / (2.0 * m), m)
        chunk = max(1, (1 << 22) // (m * _PANEL_NODES))
        for lo in range(0, sel.size, chunk):
            idx = sel[lo : lo + chunk]
            args = (a[idx] * u0[idx])[:, None] * nodes[None, :]
            out[idx] = u0[idx] * (np.cos(args) @ wts)
    return out


def _heaviside_half(x: np.ndarray) -> np.ndarray:
    """Step function: 1 for x > 0, 1/2 at x == 0, 0 for x < 0."""
    return np.where(x > 0.0, 1.0, np.where(x == 0.0, 0.5, 0.0))


def decay_matrix_retarded(
    cloud: AtomicCloud,
    t: float,
    n_quad: int = 64,
    frame: str = "alpha",
    method: str = "aligned",
) -> np.ndarray:
    """Decay matrix before the collective regime is fully established.

    Entry (j, j') is gamma1 times the average over emission directions n
    of exp(i k0 n . dr) * Theta[t - |n . dr|], dr = r_j - r_j', with c = 1
    and the Theta = 1/2 boundary convention.  The diagonal is gamma1 for
    any t > 0 and gamma1/2 at exactly t = 0.

    method="aligned" (default) evaluates the average per pair with the
    polar axis along dr, where the azimuthal integral is exact and the
    light-cone cut bounds the 1-D integration range; composite
    Gauss-Legendre panels supply about one node per radian of phase, and
    at least ``n_quad`` nodes per pair.
    method="global" uses one explicit product grid over the sphere
    (n_quad polar x 2*n_quad azimuth nodes) for all pairs; it is the
    literal spherical average and serves as a cross-check at moderate
    k0 * R0.

    frame="alpha" returns the average itself (real symmetric);
    frame="beta" conjugates by the incident-phase diagonal so the
    t -> infinity limit is the static matrix of :func:`build_decay_matrix`.
    """
    if t < 0:
        raise ParameterError(f"t must be nonnegative, got {t}")
    if n_quad < 8:
        raise ParameterError(f"n_quad must be >= 8, got {n_quad}")
    p = cloud.params
    n = cloud.n_atoms
    dist = pair_distances(cloud)

    if method == "aligned":
        out = np.zeros((n, n))
        iu, ju = np.triu_indices(n, k=1)
        d = dist[iu, ju]
        if d.size and np.min(d) == 0.0:
            # Coincident atoms: dr = 0 behaves like a diagonal entry.
            coincident = d == 0.0
            out[iu[coincident], ju[coincident]] = 1.0 if t > 0 else 0.5
        u0 = np.minimum(1.0, np.divide(t, d, out=np.ones_like(d), where=d > 0.0))
        live = (d > 0.0) & (u0 > 0.0)
        if np.any(live):
            vals = _cos_integral(p.k0 * d[live], u0[live], n_quad)
            out[iu[live], ju[live]] = vals
        out = out + out.T
        np.fill_diagonal(out, 1.0 if t > 0 else 0.5)
        result = out.astype(complex)
    elif method == "global":
        dirs, w = sphere_quadrature(n_quad)
        proj = cloud.positions @ dirs.T  # (N, M)
        result = np.zeros((n, n), dtype=complex)
        for j in range(n):
            rel = proj[j] - proj  # (N, M), row j' holds n.(r_j - r_j')
            theta = _heaviside_half(t - np.abs(rel))
            result[j] = (np.exp(1j * p.k0 * rel) * theta) @ w
    else:
        raise ParameterError(f"unknown method {method!r}")

    if frame == "beta":
        u = frame_phases(cloud)
        result = result * np.outer(u, np.conj(u))
    elif frame != "alpha":
        raise ParameterError(f"unknown frame {frame!r}")
    return p.gamma1 * result
