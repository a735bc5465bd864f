"""Permutation-symmetry basis for the singly-excited manifold.

The fully symmetric vector (every component 1/sqrt(N)) spans the
one-dimensional {N} representation of the permutation group.  The
remaining N-1 dimensions form the mixed-symmetry {N-1,1} representation,
with basis vectors

    exact:  f^l_j = (1 + 1/sqrt(N)) / (N-1) - delta_jl   (j < N-1 index),
            f^l_{N-1} = -1/sqrt(N)
    approx: f^l_j = 1/N - delta_jl

for l = 0 .. N-2 (zero-based).  The exact vectors are orthonormal and
orthogonal to the symmetric one; the approximate vectors are orthogonal
to it exactly but normalized only up to O(1/N).  The basis depends on N
alone: incident-photon phases are already absorbed into the amplitude
frame, so generalized permutations act as plain transpositions here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

EXACT = "exact"
APPROX = "approx"


@dataclass(frozen=True)
class DickeBasis:
    """Symmetric vector plus the N-1 mixed-symmetry vectors f^l."""

    n_atoms: int
    symmetric: np.ndarray          # (N,)
    f_basis: np.ndarray            # (N-1, N), row l is f^l
    mode: str = EXACT

    def full_matrix(self) -> np.ndarray:
        """(N, N) matrix whose rows are {symmetric, f^0, ..., f^{N-2}}."""
        return np.vstack([self.symmetric, self.f_basis])


@dataclass(frozen=True)
class DickeProjection:
    """Expansion coefficients of an amplitude vector in the Dicke basis."""

    c_sym: complex
    c_f: np.ndarray                # (N-1,)
    residual_norm: float

    def subspace_weight(self) -> float:
        """Total probability weight in the {N-1,1} subspace."""
        return float(np.sum(np.abs(self.c_f) ** 2))


def build_basis(n_atoms: int, mode: str = EXACT) -> DickeBasis:
    """Construct the {N} and {N-1,1} basis vectors for N atoms."""
    if n_atoms < 2:
        raise ParameterError(f"the mixed-symmetry tableau needs n_atoms >= 2, got {n_atoms}")
    n = int(n_atoms)
    sym = np.full(n, 1.0 / np.sqrt(n))
    f = np.zeros((n - 1, n))
    if mode == EXACT:
        f[:, : n - 1] = (1.0 + 1.0 / np.sqrt(n)) / (n - 1)
        f[:, n - 1] = -1.0 / np.sqrt(n)
        f[np.arange(n - 1), np.arange(n - 1)] -= 1.0
    elif mode == APPROX:
        f[:, :] = 1.0 / n
        f[np.arange(n - 1), np.arange(n - 1)] -= 1.0
    else:
        raise ParameterError(f"mode must be 'exact' or 'approx', got {mode!r}")
    return DickeBasis(n_atoms=n, symmetric=sym, f_basis=f, mode=mode)


def project(state, basis: DickeBasis) -> DickeProjection:
    """Expand an amplitude state over {symmetric, f^l}.

    Coefficients are plain inner products <symmetric|beta>, <f^l|beta>.
    In exact mode the basis is complete, so the residual is numerical
    noise and |c_sym|^2 + sum |c_f|^2 + residual^2 equals ||beta||^2.
    """
    beta = np.asarray(state.beta, dtype=complex)
    if beta.shape != (basis.n_atoms,):
        raise ParameterError(
            f"state dimension {beta.shape} does not match basis n_atoms={basis.n_atoms}"
        )
    if getattr(state, "frame", "beta") != "beta":
        raise ParameterError("project expects a beta-frame state; convert with to_beta first")
    c_sym = complex(basis.symmetric @ beta)
    c_f = basis.f_basis @ beta
    recon = c_sym * basis.symmetric + c_f @ basis.f_basis
    residual = float(np.linalg.norm(beta - recon))
    return DickeProjection(c_sym=c_sym, c_f=c_f, residual_norm=residual)


def apply_transposition(vectors: np.ndarray, j: int, l: int) -> np.ndarray:
    """Swap components j and l of each row vector."""
    out = np.array(vectors, copy=True)
    out[..., [j, l]] = out[..., [l, j]]
    return out


def symmetry_check(basis: DickeBasis, permutation: tuple[int, int],
                   leak_tol: float = 1e-12) -> np.ndarray:
    """Representation matrix of a generalized transposition on the f basis.

    Applies the swap (j, l) (zero-based atom indices) to every f^l vector
    and returns the (N-1, N-1) matrix R with R[m, m'] = <f^m|O f^m'>.
    Verifies closure of the {N-1,1} subspace: the permuted vectors carry
    no symmetric component and are reproduced by the returned matrix to
    within ``leak_tol``.
    """
    if basis.mode != EXACT:
        raise ParameterError("symmetry_check requires an exact-mode basis")
    j, l = permutation
    n = basis.n_atoms
    if not (0 <= j < n and 0 <= l < n):
        raise ParameterError(f"permutation indices out of range for N={n}: {permutation}")
    if j == l:
        return np.eye(n - 1)
    permuted = apply_transposition(basis.f_basis, j, l)
    rep = basis.f_basis @ permuted.T  # rep[m, m'] = <f^m | O f^m'>
    sym_leak = float(np.max(np.abs(basis.symmetric @ permuted.T)))
    recon_err = float(np.max(np.abs(permuted - rep.T @ basis.f_basis)))
    if sym_leak > leak_tol or recon_err > leak_tol:
        raise ParameterError(
            f"permutation {permutation} leaks out of the mixed-symmetry subspace "
            f"(symmetric leakage {sym_leak:.3e}, closure defect {recon_err:.3e})"
        )
    return rep
