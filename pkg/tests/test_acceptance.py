"""End-to-end acceptance checks with their quoted target numbers.

Each test drives one check_* function from ctap_sim.acceptance and
asserts every contained clause at its stated tolerance.  The helpers
cache the underlying runs, so the suite costs each scenario once.
"""

import pytest

from ctap_sim import acceptance


def assert_all(checks):
    failed = [c for c in checks if not c.passed]
    assert not failed, "; ".join(
        f"{c.group}/{c.name}: measured {c.measured:.6g}, expected {c.expected}" for c in failed
    )


def test_clean_five_site_transport_fidelity():
    assert_all(acceptance.check_clean_transport())


def test_tls_transport_fidelity_and_anticrossing():
    assert_all(acceptance.check_tls_transport())


def test_strong_coupling_return_and_oscillations():
    assert_all(acceptance.check_strong_coupling())


def test_nonadiabatic_baseline_losses():
    assert_all(acceptance.check_nonadiabatic_baseline())


def test_measurement_loss_sweep():
    assert_all(acceptance.check_measurement_sweep())


def test_firstorder_loss_matches_full_lindblad():
    assert_all(acceptance.check_firstorder_vs_exact())


def test_rate_formulas():
    assert_all(acceptance.check_rate_formulas())


def test_reduced_dynamics_against_joint_oracle():
    assert_all(acceptance.check_reduced_dynamics_oracle())


def test_purity_during_and_after_transport():
    assert_all(acceptance.check_purity())


def test_integrator_invariants_and_convergence():
    assert_all(acceptance.check_integrator_invariants())


def test_dark_state_zero_mode_and_phase():
    assert_all(acceptance.check_dark_state())
