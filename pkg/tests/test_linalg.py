import numpy as np
import pytest

from spinstar import linalg
from spinstar.errors import ContractError, DimensionError

rng = np.random.default_rng(7)


def random_hermitian(d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_pure_state(d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def bell():
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.outer(phi, phi.conj())


class TestKron:
    def test_identity(self):
        assert np.array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal_product(self):
        p = 0.7
        d = np.diag([p, 1 - p]).astype(complex)
        out = linalg.kron(d, d)
        expect = np.diag([p * p, p * (1 - p), (1 - p) * p, (1 - p) ** 2])
        assert np.allclose(out, expect)

    def test_dimension_law(self):
        out = linalg.kron(np.eye(2), np.eye(8))
        assert out.shape == (16, 16)

    def test_cap(self):
        with pytest.raises(DimensionError):
            linalg.kron(np.eye(2), np.eye(3), cap=4)

    def test_rejects_nonfinite(self):
        bad = np.array([[np.nan, 0], [0, 1]])
        with pytest.raises(ContractError):
            linalg.kron(bad, np.eye(2))


class TestHermitianEigensystem:
    def test_pauli_x(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        eig = linalg.hermitian_eigensystem(sx)
        assert np.allclose(eig.eigenvalues, [-1, 1])
        # eigenvectors (1, -+1)/sqrt(2) up to phase
        for col, val in zip(eig.eigenvectors.T, (-1, 1)):
            assert np.allclose(sx @ col, val * col)

    def test_zero_matrix(self):
        eig = linalg.hermitian_eigensystem(np.zeros((5, 5)))
        assert np.allclose(eig.eigenvalues, 0)

    def test_interaction_nonzero_eigenvalues(self):
        # two coupled sites with unit amplitudes give the pair +-sqrt(2)
        from spinstar import ModelConfig, SitesConstant, build_hamiltonian_full
        cfg = ModelConfig(n=2, alpha=1.0, coupling=SitesConstant((1, 1)), p=1.0)
        eig = linalg.hermitian_eigensystem(build_hamiltonian_full(cfg, 0.0))
        nonzero = eig.eigenvalues[np.abs(eig.eigenvalues) > 1e-12]
        assert np.allclose(sorted(nonzero), [-np.sqrt(2), np.sqrt(2)])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractError):
            linalg.hermitian_eigensystem(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_reconstruction_property(self):
        for d in (3, 8, 17):
            h = random_hermitian(d)
            eig = linalg.hermitian_eigensystem(h)
            recon = (eig.eigenvectors * eig.eigenvalues) @ eig.eigenvectors.conj().T
            assert np.abs(recon - h).max() <= 1e-10 * max(1, np.abs(h).max())


class TestUnitaryFromGenerator:
    def test_zero_generator(self):
        assert np.allclose(linalg.unitary_from_generator(np.zeros((3, 3)), 1.0),
                           np.eye(3))

    def test_pauli_x_half_period(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        u = linalg.unitary_from_generator(sx, np.pi / 2)
        assert np.abs(u - (-1j) * sx).max() < 1e-12

    def test_unitarity_random(self):
        for _ in range(5):
            h = random_hermitian(8)
            u = linalg.unitary_from_generator(h, 0.37)
            assert np.abs(u.conj().T @ u - np.eye(8)).max() <= 1e-10


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rho = random_pure_state(2)
        sigma = random_pure_state(3)
        out = linalg.partial_trace(np.kron(rho, sigma), [2, 3], keep=[0])
        assert np.abs(out - rho).max() < 1e-12

    def test_bell_reduces_to_maximally_mixed(self):
        for keep in ([0], [1]):
            out = linalg.partial_trace(bell(), [2, 2], keep=keep)
            assert np.abs(out - np.eye(2) / 2).max() < 1e-12

    def test_against_index_summation_oracle(self):
        # independent element-wise summation over the traced index
        rho = random_pure_state(8)
        out = linalg.partial_trace(rho, [2, 2, 2], keep=[0, 1])
        byhand = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                byhand[i, j] = sum(rho[2 * i + k, 2 * j + k] for k in range(2))
        assert np.abs(out - byhand).max() < 1e-12

    def test_composition(self):
        rho = random_pure_state(16)
        joint = linalg.partial_trace(rho, [2, 2, 2, 2], keep=[0])
        stepwise = linalg.partial_trace(rho, [2, 2, 2, 2], keep=[0, 1])
        stepwise = linalg.partial_trace(stepwise, [2, 2], keep=[0])
        assert np.abs(joint - stepwise).max() < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            linalg.partial_trace(np.eye(6), [2, 2], keep=[0])


class TestPartialTranspose:
    def test_bell_min_eigenvalue(self):
        assert abs(linalg.pt_min_eigenvalue(bell()) + 0.5) < 1e-12

    def test_product_state_is_ppt(self):
        rho = np.kron(random_pure_state(2), random_pure_state(2))
        assert linalg.pt_min_eigenvalue(rho) >= -1e-12

    def test_werner_state(self):
        q = 0.6
        rho = q * bell() + (1 - q) * np.eye(4) / 4
        # PT spectrum of the Werner state is {(1+q)/4 x3, (1-3q)/4}
        assert abs(linalg.pt_min_eigenvalue(rho) - (1 - 3 * q) / 4) < 1e-12

    def test_at_most_one_negative_eigenvalue(self):
        # mixtures of a Bell projector with separable noise: the PT of a
        # two-qubit state can have at most one negative eigenvalue
        for _ in range(25):
            q = rng.uniform(0, 1)
            rho = q * bell() + (1 - q) * np.kron(random_pure_state(2),
                                                 random_pure_state(2))
            spec = linalg.pt_spectrum(rho)
            assert np.sum(spec < -1e-9) <= 1

    def test_rejects_non_state(self):
        with pytest.raises(ContractError):
            linalg.pt_min_eigenvalue(np.eye(4))  # trace 4
