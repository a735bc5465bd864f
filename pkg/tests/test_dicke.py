import numpy as np
import pytest

from dickesim import (
    AmplitudeState,
    ParameterError,
    build_basis,
    project,
    symmetry_check,
)


class TestBuildBasis:
    def test_needs_two_atoms(self):
        with pytest.raises(ParameterError):
            build_basis(1)

    def test_n2_exact_is_the_antisymmetric_pair(self):
        basis = build_basis(2)
        np.testing.assert_allclose(basis.symmetric, [1 / np.sqrt(2)] * 2)
        # evaluating the printed coefficients: ((1 + 1/sqrt(2))/1 - 1, -1/sqrt(2))
        np.testing.assert_allclose(basis.f_basis[0], [1 / np.sqrt(2), -1 / np.sqrt(2)],
                                   atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 5, 16])
    def test_exact_gram_is_identity(self, n):
        basis = build_basis(n)
        full = basis.full_matrix()
        gram = full @ full.T
        assert np.max(np.abs(gram - np.eye(n))) <= 1e-12

    @pytest.mark.parametrize("n", [2, 5, 16, 64])
    def test_completeness_unitary(self, n):
        full = build_basis(n).full_matrix()
        assert np.max(np.abs(full @ full.conj().T - np.eye(n))) <= 1e-10
        assert np.max(np.abs(full.conj().T @ full - np.eye(n))) <= 1e-10

    @pytest.mark.parametrize("n", [3, 7, 32])
    def test_orthogonal_to_symmetric_both_modes(self, n):
        for mode in ("exact", "approx"):
            basis = build_basis(n, mode=mode)
            overlap = basis.f_basis @ basis.symmetric
            assert np.max(np.abs(overlap)) <= 1e-13

    def test_approx_norm_deficit(self):
        # approx rows have norm^2 = 1 - 1/N
        n = 25
        basis = build_basis(n, mode="approx")
        norms2 = np.sum(basis.f_basis**2, axis=1)
        np.testing.assert_allclose(norms2, 1.0 - 1.0 / n, atol=1e-13)

    def test_exact_vs_approx_difference_scales_as_inverse_sqrt_n(self):
        for n in (16, 64, 256):
            exact = build_basis(n).f_basis
            approx = build_basis(n, mode="approx").f_basis
            diff = np.linalg.norm(exact - approx, axis=1)
            assert np.max(diff) * np.sqrt(n) < 2.0

    def test_rejects_unknown_mode(self):
        with pytest.raises(ParameterError):
            build_basis(4, mode="sloppy")


class TestProject:
    def test_symmetric_state_projects_cleanly(self):
        basis = build_basis(6)
        state = AmplitudeState(beta=basis.symmetric.astype(complex))
        proj = project(state, basis)
        assert proj.c_sym == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(proj.c_f)) <= 1e-14
        assert proj.residual_norm <= 1e-14

    def test_f_vector_projects_to_unit_coefficient(self):
        basis = build_basis(6)
        state = AmplitudeState(beta=basis.f_basis[3].astype(complex))
        proj = project(state, basis)
        assert abs(proj.c_sym) <= 1e-14
        assert proj.c_f[3] == pytest.approx(1.0, abs=1e-14)
        others = np.delete(proj.c_f, 3)
        assert np.max(np.abs(others)) <= 1e-14

    def test_norm_bookkeeping_random_state(self):
        rng = np.random.default_rng(8)
        n = 9
        basis = build_basis(n)
        beta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        proj = project(AmplitudeState(beta=beta), basis)
        total = abs(proj.c_sym) ** 2 + np.sum(np.abs(proj.c_f) ** 2) + proj.residual_norm**2
        assert total == pytest.approx(np.linalg.norm(beta) ** 2, rel=1e-10)

    def test_matches_bruteforce_inner_products(self):
        rng = np.random.default_rng(11)
        n = 8
        basis = build_basis(n)
        beta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        proj = project(AmplitudeState(beta=beta), basis)
        for l in range(n - 1):
            ref = sum(basis.f_basis[l][j] * beta[j] for j in range(n))
            assert proj.c_f[l] == pytest.approx(ref, abs=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            project(AmplitudeState(beta=np.ones(4, dtype=complex)), build_basis(5))

    def test_alpha_frame_rejected(self):
        with pytest.raises(ParameterError):
            project(AmplitudeState(beta=np.ones(5, dtype=complex), frame="alpha"),
                    build_basis(5))


class TestSymmetryCheck:
    def test_identity_permutation(self):
        basis = build_basis(5)
        rep = symmetry_check(basis, (2, 2))
        assert np.array_equal(rep, np.eye(4))

    def test_swap_is_orthogonal_involution(self):
        basis = build_basis(3)
        rep = symmetry_check(basis, (0, 1))
        assert rep.shape == (2, 2)
        assert np.max(np.abs(rep @ rep.T - np.eye(2))) <= 1e-12
        assert abs(abs(np.linalg.det(rep)) - 1.0) <= 1e-12
        assert np.max(np.abs(rep @ rep - np.eye(2))) <= 1e-12

    @pytest.mark.parametrize("n", [4, 9, 16])
    def test_random_transpositions_stay_in_subspace(self, n):
        basis = build_basis(n)
        rng = np.random.default_rng(123)
        for _ in range(20):
            j, l = rng.choice(n, size=2, replace=False)
            rep = symmetry_check(basis, (int(j), int(l)))
            assert np.max(np.abs(rep @ rep.T - np.eye(n - 1))) <= 1e-12

    def test_requires_exact_mode(self):
        with pytest.raises(ParameterError):
            symmetry_check(build_basis(4, mode="approx"), (0, 1))

    def test_out_of_range_indices(self):
        with pytest.raises(ParameterError):
            symmetry_check(build_basis(4), (0, 7))
