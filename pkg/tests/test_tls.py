import numpy as np
import pytest

from ctap_sim.control import PulseSchedule
from ctap_sim.errors import BadRates, DimensionTooLarge, SingularTime, TooManyBlocks
from ctap_sim.tls import (
    TlsBath,
    analytic_dephasing,
    block_diagonal,
    dephasing_coefficients,
    enumerate_blocks,
    joint_evolution_oracle,
)


def test_coefficients_pinned_tls():
    bath = TlsBath(couplings=(0.3,), inversions=(1.0,))
    for t in (0.0, 1.7, 12.0):
        gamma, delta = dephasing_coefficients(0, t, bath)
        assert gamma == pytest.approx(0.0, abs=1e-14)
        assert delta == pytest.approx(0.3, abs=1e-14)


def test_coefficients_mixed_tls():
    bath = TlsBath(couplings=(0.3,), inversions=(0.0,))
    gamma, delta = dephasing_coefficients(0, 2.0, bath)
    assert gamma == pytest.approx(0.3 * np.tan(0.6), rel=1e-12)
    assert delta == pytest.approx(0.0, abs=1e-14)


def test_coefficients_at_time_zero():
    bath = TlsBath(couplings=(0.4, 0.7), inversions=(0.3, -0.8))
    for n in (0, 1):
        gamma, delta = dephasing_coefficients(n, 0.0, bath)
        assert gamma == pytest.approx(0.0, abs=1e-14)
        assert delta == pytest.approx(bath.couplings[n] * bath.inversions[n], rel=1e-12)


def test_coefficients_singularity():
    bath = TlsBath(couplings=(1.0,), inversions=(0.0,))
    with pytest.raises(SingularTime):
        dephasing_coefficients(0, np.pi / 2.0, bath)


def test_enumerate_blocks_mixed():
    blocks = enumerate_blocks(TlsBath.uniform(0.1, 1))
    assert [b.weight for b in blocks] == [0.5, 0.5]
    blocks = enumerate_blocks(TlsBath.uniform(0.1, 3))
    assert len(blocks) == 8
    assert blocks[0].signs == (-1, -1, -1)
    assert all(b.weight == pytest.approx(0.125) for b in blocks)
    assert sum(b.weight for b in blocks) == pytest.approx(1.0, abs=1e-12)


def test_enumerate_blocks_pinned():
    blocks = enumerate_blocks(TlsBath(couplings=(0.1, 0.1), inversions=(1.0, 0.0)))
    for b in blocks:
        if b.signs[0] == -1:
            assert b.weight == 0.0
    assert sum(b.weight for b in blocks if b.signs[0] == 1) == pytest.approx(1.0)


def test_enumerate_blocks_cap():
    with pytest.raises(TooManyBlocks):
        enumerate_blocks(TlsBath.uniform(0.1, 21))


def test_block_diagonal():
    bath = TlsBath.uniform(0.45, 5)
    blocks = enumerate_blocks(bath)
    # second TLS pattern in |0>-major order flips only the last site
    assert np.allclose(block_diagonal(blocks[0], bath), [-0.45] * 5)
    assert np.allclose(block_diagonal(blocks[1], bath), [-0.45] * 4 + [0.45])
    bath3 = TlsBath(couplings=(0.1, 0.2, 0.3), inversions=(0, 0, 0))
    first = enumerate_blocks(bath3)[0]
    assert np.allclose(block_diagonal(first, bath3), [-0.1, -0.2, -0.3])


def test_analytic_dephasing_cosine_zero():
    bath = TlsBath(couplings=(0.1, 0.2), inversions=(0.0, 0.0))
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = analytic_dephasing(rho0, bath, np.zeros((2, 2)), 5.0 * np.pi)
    assert abs(out[0, 1]) <= 1e-15  # cos(pi/2) kills the coherence
    assert out[0, 0] == pytest.approx(0.5)


def test_analytic_dephasing_identity_at_t0():
    bath = TlsBath(couplings=(0.3, 0.5), inversions=(0.0, 0.0))
    rho0 = np.array([[0.7, 0.2j], [-0.2j, 0.3]], dtype=complex)
    out = analytic_dephasing(rho0, bath, np.zeros((2, 2)), 0.0)
    assert np.allclose(out, rho0)


def test_analytic_dephasing_rejects_bad_rates():
    bath = TlsBath(couplings=(0.3, 0.5), inversions=(0.0, 0.0))
    rho0 = np.eye(2, dtype=complex) / 2.0
    with pytest.raises(BadRates):
        analytic_dephasing(rho0, bath, np.array([[0.0, -0.1], [-0.1, 0.0]]), 1.0)
    with pytest.raises(BadRates):
        analytic_dephasing(rho0, bath, np.array([[0.1, 0.0], [0.0, 0.0]]), 1.0)
    with pytest.raises(BadRates):
        analytic_dephasing(rho0, TlsBath(couplings=(0.3, 0.5), inversions=(0.5, 0.0)), np.zeros((2, 2)), 1.0)


def test_analytic_matches_oracle_with_damping():
    bath = TlsBath(couplings=(0.3, 0.5), inversions=(0.0, 0.0))
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    rates = np.array([[0.0, 0.01], [0.01, 0.0]])

    # build a 2-site local-style model carrying exactly this rate
    class FakeGeometry:
        rate_per_qpc = 1.0
        n_sites = 1
        total_rate = 1.0

    class FakeModel:
        geometry = FakeGeometry()

        def rate_matrix(self, sites):
            return rates

    grid = np.linspace(0.0, 10.0, 101)
    traj = joint_evolution_oracle(rho0, bath, None, FakeModel(), grid)
    for t_req in (1.0, 5.0, 10.0):
        idx = int(np.argmin(np.abs(traj.times - t_req)))
        ref = analytic_dephasing(rho0, bath, rates, traj.times[idx])
        assert np.max(np.abs(traj.states[idx] - ref)) < 1e-6


def test_oracle_static_cases():
    rho0 = np.full((3, 3), 1.0 / 3.0, dtype=complex)
    grid = np.linspace(0.0, 5.0, 26)
    # no couplings, no drive: frozen state
    still = joint_evolution_oracle(rho0, TlsBath.uniform(0.0, 3), None, None, grid)
    assert np.max(np.abs(still.states[-1] - rho0)) < 1e-12
    # pinned TLSs: fixed diagonal Hamiltonian, purity conserved
    bath = TlsBath(couplings=(0.3, 0.5, 0.7), inversions=(1.0, -1.0, 1.0))
    traj = joint_evolution_oracle(rho0, bath, None, None, grid)
    assert np.allclose(traj.observables["purity"], 1.0, atol=1e-10)


def test_oracle_matches_closed_form():
    bath = TlsBath(couplings=(0.3, 0.5, 0.7), inversions=(0.0, 0.0, 0.0))
    rho0 = np.full((3, 3), 1.0 / 3.0, dtype=complex)
    grid = np.linspace(0.0, 10.0, 101)
    traj = joint_evolution_oracle(rho0, bath, None, None, grid)
    zero = np.zeros((3, 3))
    for t, s in zip(traj.times, traj.states):
        assert np.max(np.abs(s - analytic_dephasing(rho0, bath, zero, t))) < 1e-6
        assert abs(np.trace(s) - 1.0) <= 1e-8


def test_oracle_coherence_revival():
    chi = 0.4
    bath = TlsBath(couplings=(chi, chi), inversions=(0.0, 0.0))
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    t_rev = np.pi / chi
    traj = joint_evolution_oracle(rho0, bath, None, None, np.linspace(0.0, t_rev, 81))
    assert abs(traj.states[-1][0, 1]) >= 0.99 * 0.5


def test_oracle_dimension_cap():
    with pytest.raises(DimensionTooLarge):
        joint_evolution_oracle(np.eye(7, dtype=complex) / 7.0, TlsBath.uniform(0.1, 7), None, None, [0.0, 1.0])


def test_oracle_with_drive_preserves_trace():
    bath = TlsBath.uniform(0.1, 3)
    sched = PulseSchedule(section=(0, 2), T=20.0, window=(0.0, 10.0))
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[0, 0] = 1.0
    traj = joint_evolution_oracle(rho0, bath, sched, None, np.linspace(0.0, 10.0, 51))
    for s in traj.states:
        assert abs(np.trace(s) - 1.0) <= 1e-8
