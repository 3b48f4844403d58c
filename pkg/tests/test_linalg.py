import numpy as np
import pytest

from dissipvqe.linalg import (
    I2,
    PAULI_X,
    PAULI_Z,
    NearDefectiveMatrixWarning,
    apply_local,
    apply_local_super,
    assert_density_matrix,
    basis_state,
    devectorize,
    eig_general,
    embed_operator,
    is_density_matrix,
    kron,
    kron_all,
    matrix_exponential,
    overlap,
    trace_norm,
    vectorize,
)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_density(rng, d):
    m = random_complex(rng, (d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_complex(rng, (d, d)))
    return q * (r.diagonal() / np.abs(r.diagonal()))


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(I2, I2), np.eye(4))

    def test_basis_action(self):
        op = kron(PAULI_X, basis_state("0"))
        out = op @ vectorize_ket("00")
        assert np.allclose(out, vectorize_ket("10"))

    def test_mixed_product_property(self):
        rng = np.random.default_rng(0)
        a, b, c, d = (random_complex(rng, (2, 2)) for _ in range(4))
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.abs(lhs - rhs).max() < 1e-12


def vectorize_ket(bits):
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


class TestMatrixExponential:
    def test_zero_matrix(self):
        assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        lam = np.array([0.3, -1.2, 2.0 + 0.5j])
        out = matrix_exponential(np.diag(lam))
        assert np.abs(out - np.diag(np.exp(lam))).max() < 1e-12

    def test_taylor_series_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            a = random_complex(rng, (4, 4))
            a = a / max(np.linalg.norm(a, 2), 1.0)
            series = np.zeros((4, 4), dtype=complex)
            term = np.eye(4, dtype=complex)
            for k in range(1, 31):
                series += term
                term = term @ a / k
            assert np.abs(matrix_exponential(a) - series).max() < 1e-10

    def test_commuting_factorization(self):
        rng = np.random.default_rng(2)
        a = random_complex(rng, (4, 4))
        p = 0.3 * a + 0.1 * a @ a
        q = -0.7 * a + 0.05 * a @ a
        lhs = matrix_exponential(p + q)
        rhs = matrix_exponential(p) @ matrix_exponential(q)
        assert np.abs(lhs - rhs).max() < 1e-10

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.zeros((2, 3)))


class TestEigGeneral:
    def test_diagonal_case(self):
        w, r, l = eig_general(np.diag([0.0, -0.5, -0.5, -1.0]))
        assert np.allclose(sorted(w.real, reverse=True), [0, -0.5, -0.5, -1])
        assert np.abs(l.conj().T @ r - np.eye(4)).max() < 1e-9

    def test_reconstruction_oracle(self):
        rng = np.random.default_rng(3)
        a = random_complex(rng, (4, 4))
        w, r, l = eig_general(a)
        recon = (r * w) @ l.conj().T
        assert np.abs(recon - a).max() < 1e-9

    def test_degenerate_reconstruction(self):
        # repeated eigenvalue needs dual-basis cleanup within the cluster
        rng = np.random.default_rng(4)
        v = random_complex(rng, (4, 4))
        a = v @ np.diag([1.0, 1.0, -0.5, 2.0]) @ np.linalg.inv(v)
        w, r, l = eig_general(a)
        recon = (r * w) @ l.conj().T
        assert np.abs(recon - a).max() < 1e-8

    def test_near_defective_warning(self):
        a = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-11]])
        with pytest.warns(NearDefectiveMatrixWarning):
            eig_general(a)


class TestTraceNorm:
    def test_identity(self):
        assert abs(trace_norm(np.eye(4)) - 4.0) < 1e-12

    def test_density_matrix(self):
        rho = random_density(np.random.default_rng(5), 8)
        assert abs(trace_norm(rho) - 1.0) < 1e-10

    def test_unitary_invariance(self):
        rng = np.random.default_rng(6)
        a = random_complex(rng, (4, 4))
        u, v = random_unitary(rng, 4), random_unitary(rng, 4)
        assert abs(trace_norm(a) - trace_norm(u @ a @ v)) < 1e-10


class TestApplyLocal:
    def test_identity_op(self):
        rho = random_density(np.random.default_rng(7), 8)
        out = apply_local(rho, I2, [1])
        assert np.abs(out - rho).max() < 1e-12

    def test_basis_action(self):
        out = apply_local(basis_state("00"), PAULI_X, [0])
        assert np.allclose(out, basis_state("10"))

    def test_dense_embedding_oracle(self):
        rng = np.random.default_rng(8)
        rho = random_density(rng, 8)
        op = random_complex(rng, (4, 4))
        for sites in ([0, 1], [1, 2], [2, 0]):
            emb = embed_operator(op, sites, 3)
            expected = emb @ rho @ emb.conj().T
            assert np.abs(apply_local(rho, op, sites) - expected).max() < 1e-12

    def test_site_validation(self):
        rho = basis_state("00")
        with pytest.raises(ValueError):
            apply_local(rho, I2, [2])
        with pytest.raises(ValueError):
            apply_local(rho, np.eye(4), [0, 0])


class TestVectorization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(9)
        for d in (2, 4, 8, 16):
            a = random_complex(rng, (d, d))
            assert np.array_equal(devectorize(vectorize(a), d), a)

    def test_inner_product_is_trace(self):
        rng = np.random.default_rng(10)
        tau = random_complex(rng, (8, 8))
        rho = random_complex(rng, (8, 8))
        via_vec = np.vdot(vectorize(tau), vectorize(rho))
        via_trace = np.trace(tau.conj().T @ rho)
        assert abs(via_vec - via_trace) < 1e-12
        assert abs(overlap(tau, rho) - via_trace) < 1e-12

    def test_conjugation_identity(self):
        # vec(A X B) = kron(B.T, A) vec(X) in the column-stacking convention
        rng = np.random.default_rng(11)
        a, x, b = (random_complex(rng, (4, 4)) for _ in range(3))
        lhs = vectorize(a @ x @ b)
        rhs = np.kron(b.T, a) @ vectorize(x)
        assert np.abs(lhs - rhs).max() < 1e-12


class TestApplyLocalSuper:
    def test_matches_dense_conjugation(self):
        rng = np.random.default_rng(12)
        rho = random_density(rng, 8)
        d = random_complex(rng, (2, 2))
        s = np.kron(d.conj(), d)  # X -> d X d^dag, vectorized
        for site in range(3):
            emb = embed_operator(d, [site], 3)
            expected = emb @ rho @ emb.conj().T
            got = devectorize(apply_local_super(vectorize(rho), s, [site], 3), 8)
            assert np.abs(got - expected).max() < 1e-12

    def test_two_site_superoperator(self):
        rng = np.random.default_rng(13)
        rho = random_density(rng, 8)
        d = random_complex(rng, (4, 4))
        s = np.kron(d.conj(), d)
        for sites in ([0, 2], [2, 1]):
            emb = embed_operator(d, sites, 3)
            expected = emb @ rho @ emb.conj().T
            got = devectorize(apply_local_super(vectorize(rho), s, sites, 3), 8)
            assert np.abs(got - expected).max() < 1e-11


class TestDensityChecks:
    def test_valid_state(self):
        rho = random_density(np.random.default_rng(14), 4)
        assert is_density_matrix(rho)
        assert_density_matrix(rho)

    def test_invalid_states(self):
        assert not is_density_matrix(np.eye(2))  # trace 2
        bad = np.array([[1.5, 0], [0, -0.5]], dtype=complex)
        assert not is_density_matrix(bad)
        with pytest.raises(ValueError):
            assert_density_matrix(bad)

    def test_kron_all_empty(self):
        assert np.array_equal(kron_all([]), np.array([[1.0 + 0j]]))
