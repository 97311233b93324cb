import numpy as np
import pytest

from ctap_sim.errors import NonHermitianInput
from ctap_sim.linalg import density_check, hermitian_eigendecompose


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def test_identity_eigenvalues():
    d = hermitian_eigendecompose(np.eye(3))
    assert np.allclose(d.values, [1.0, 1.0, 1.0])


def test_pauli_x():
    d = hermitian_eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(d.values, [-1.0, 1.0])


def test_three_site_chain():
    m = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    d = hermitian_eigendecompose(m)
    assert np.allclose(d.values, [-np.sqrt(2), 0.0, np.sqrt(2)], atol=1e-12)


def test_reconstruction_random():
    rng = np.random.default_rng(7)
    for n in (1, 2, 5, 17, 64):
        m = random_hermitian(rng, n)
        d = hermitian_eigendecompose(m)
        rec = d.vectors @ np.diag(d.values) @ d.vectors.conj().T
        assert np.max(np.abs(rec - m)) <= 1e-10 * max(np.max(np.abs(m)), 1.0)


def test_eigenvalues_sorted_and_residuals():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = random_hermitian(rng, 12)
        d = hermitian_eigendecompose(m)
        assert np.all(np.diff(d.values) >= -1e-14)
        norm = np.linalg.norm(m)
        for k in range(12):
            res = np.linalg.norm(m @ d.vectors[:, k] - d.values[k] * d.vectors[:, k])
            assert res <= 1e-10 * norm
        gram = d.vectors.conj().T @ d.vectors
        assert np.max(np.abs(gram - np.eye(12))) <= 1e-10


def test_phase_convention_and_determinism():
    rng = np.random.default_rng(11)
    m = random_hermitian(rng, 9)
    d1 = hermitian_eigendecompose(m)
    d2 = hermitian_eigendecompose(m)
    assert np.array_equal(d1.values, d2.values)
    assert np.array_equal(d1.vectors, d2.vectors)
    for k in range(9):
        idx = int(np.argmax(np.abs(d1.vectors[:, k])))
        pivot = d1.vectors[idx, k]
        assert abs(pivot.imag) <= 1e-12
        assert pivot.real >= 0.0


def test_eigenvalues_invariant_under_phase_conjugation():
    rng = np.random.default_rng(19)
    m = random_hermitian(rng, 8)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=8))
    u = np.diag(phases)
    d1 = hermitian_eigendecompose(m)
    d2 = hermitian_eigendecompose(u @ m @ u.conj().T)
    assert np.max(np.abs(d1.values - d2.values)) <= 1e-10


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        hermitian_eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonHermitianInput):
        hermitian_eigendecompose(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(NonHermitianInput):
        hermitian_eigendecompose(np.zeros((2, 3)))


def test_density_check_cases():
    r = density_check(np.diag([0.5, 0.5]))
    assert r.trace_err == 0.0 and r.min_eigenvalue == pytest.approx(0.5)
    r = density_check(np.diag([1.1, -0.1]))
    assert r.min_eigenvalue == pytest.approx(-0.1)
    r = density_check(np.full((2, 2), 0.5))
    assert r.trace_err == 0.0
    assert abs(r.min_eigenvalue) <= 1e-14
    assert r.ok(1e-8)
