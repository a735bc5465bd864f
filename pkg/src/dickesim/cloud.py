"""Random atomic-cloud configurations and geometric utilities.

Atoms are placed independently with the isotropic Gaussian density
P(r) = (sqrt(pi) R0)^-3 exp(-r^2 / R0^2), realized as one Gaussian per
Cartesian coordinate with sigma = R0 / sqrt(2).  Sampling uses the
counter-based Philox generator so that a (seed, stream) pair fully
determines a configuration on any platform.

Units: c = 1 throughout; k0 sets the inverse length scale and gamma1 the
rate scale.  Configuration files express lengths in units of 1/k0 and
rates in units of gamma1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ParameterError

_UNIT_TOL = 1e-12


def _as_unit_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ParameterError(f"n0 must be a 3-vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > _UNIT_TOL:
        raise ParameterError(f"n0 must be a unit vector, |n0| = {norm!r}")
    return v


@dataclass(frozen=True)
class CloudParams:
    """Physical parameters of one disordered-cloud realization.

    Attributes
    ----------
    n_atoms : int
        Number of two-level atoms N (>= 1).
    k0 : float
        Wavenumber of the absorbed photon, units 1/length.
    r0 : float
        Gaussian size parameter R0 of the cloud, units length.
    gamma1 : float
        Single-atom amplitude decay rate, units 1/time.
    n0 : ndarray, shape (3,)
        Unit vector along the incident photon; defaults to +z.
    seed : int
        Base seed of the Philox stream.
    """

    n_atoms: int
    k0: float
    r0: float
    gamma1: float = 1.0
    n0: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    seed: int = 0

    def __post_init__(self):
        if int(self.n_atoms) < 1 or self.n_atoms != int(self.n_atoms):
            raise ParameterError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        for name in ("k0", "r0", "gamma1"):
            value = float(getattr(self, name))
            if not value > 0.0 or not np.isfinite(value):
                raise ParameterError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "n0", _as_unit_vector(self.n0))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def k0r0(self) -> float:
        """Dimensionless sample size k0 * R0."""
        return self.k0 * self.r0

    @property
    def optical_depth(self) -> float:
        """Forward-enhancement diagnostic N / (k0 R0)^2."""
        return self.n_atoms / self.k0r0**2


@dataclass(frozen=True)
class AtomicCloud:
    """An immutable realization of N atomic positions."""

    params: CloudParams
    positions: np.ndarray  # (N, 3), units length

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (self.params.n_atoms, 3):
            raise ParameterError(
                f"positions shape {pos.shape} does not match n_atoms={self.params.n_atoms}"
            )
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_atoms(self) -> int:
        return self.params.n_atoms

    def n0_projections(self) -> np.ndarray:
        """Positions projected on the incident direction, n0 . r_j."""
        return self.positions @ self.params.n0


def _philox_rng(seed: int, stream: int) -> np.random.Generator:
    # Distinct 128-bit Philox keys give independent, platform-stable streams.
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream & 0xFFFFFFFFFFFFFFFF)])
    return np.random.Generator(np.random.Philox(key=key))


def sample_cloud(params: CloudParams, stream: int = 0) -> AtomicCloud:
    """Draw one cloud realization.

    Each Cartesian coordinate is an independent N(0, R0^2/2) Gaussian, so
    that |r|^2 averages to (3/2) R0^2.  The same (params.seed, stream)
    always returns bit-identical positions; ensemble runners use
    consecutive stream indices for independent realizations.
    """
    rng = _philox_rng(params.seed, stream)
    sigma = params.r0 / np.sqrt(2.0)
    positions = sigma * rng.standard_normal((params.n_atoms, 3))
    return AtomicCloud(params=params, positions=positions)


def pair_distances(cloud: AtomicCloud) -> np.ndarray:
    """N x N matrix of Euclidean distances |r_j - r_j'|."""
    if cloud.n_atoms == 1:
        return np.zeros((1, 1))
    return squareform(pdist(cloud.positions))


def min_pair_distance(cloud: AtomicCloud) -> float:
    """Smallest nonzero interatomic distance (inf for a single atom)."""
    if cloud.n_atoms < 2:
        return np.inf
    d = pair_distances(cloud)
    return float(np.min(d[np.triu_indices(cloud.n_atoms, k=1)]))


def max_pair_distance(cloud: AtomicCloud) -> float:
    if cloud.n_atoms < 2:
        return 0.0
    d = pair_distances(cloud)
    return float(np.max(d))


def cloud_params_from_dict(table: dict) -> CloudParams:
    """Build CloudParams from a configuration table.

    Recognized keys: ``n_atoms``, ``r0_k0`` (R0 in units of 1/k0),
    ``gamma1`` (in units of gamma1, normally 1.0), ``n0`` (3-list),
    ``seed``, and optional ``k0`` (absolute wavenumber, default 1.0).
    """
    try:
        n_atoms = int(table["n_atoms"])
        r0_k0 = float(table["r0_k0"])
    except KeyError as exc:
        raise ParameterError(f"cloud table is missing required key {exc}") from exc
    k0 = float(table.get("k0", 1.0))
    return CloudParams(
        n_atoms=n_atoms,
        k0=k0,
        r0=r0_k0 / k0,
        gamma1=float(table.get("gamma1", 1.0)),
        n0=np.asarray(table.get("n0", [0.0, 0.0, 1.0]), dtype=float),
        seed=int(table.get("seed", 0)),
    )


def write_positions_csv(cloud: AtomicCloud, path) -> None:
    """Export positions, one row per atom, columns x,y,z."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"])
        for row in cloud.positions:
            writer.writerow([repr(float(c)) for c in row])
