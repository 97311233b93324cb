"""Validation suite: canned checks with quoted target numbers.

Each check_* function runs one scenario and returns a list of
CriterionCheck records (measured vs expected, pass/fail).  run_all
drives the whole suite and is what `ctap-sim validate` prints.
"""

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .control import PulseSchedule, dark_state, dynamical_phase, rail_hamiltonian, track_spectrum
from .dynamics import (
    IntegratorConfig,
    block_averaged_transport,
    evolve_lindblad,
    evolve_pure,
    transfer_loss_firstorder,
    transfer_loss_local,
)
from .linalg import density_check
from .measurement import (
    RailGeometry,
    decoherence_rate_exact,
    decoherence_rate_weak,
    local_limit_rate,
    saturation_rate,
)
from .tls import TlsBath, analytic_dephasing, joint_evolution_oracle

FIVE_SITE_BLOCK = np.array([-1.0, 1.0, 1.0, 1.0, 1.0])
BASELINE_PAIRS = ((3, 150.0), (5, 196.0), (7, 225.0), (9, 242.0), (11, 249.0))


@dataclass(frozen=True)
class CriterionCheck:
    group: str
    name: str
    measured: float
    expected: str
    passed: bool


def _check(group, name, measured, expected, passed):
    return CriterionCheck(group, name, float(measured), expected, bool(passed))


def sweep_geometry(dots: int, a_over_d: float, margin: int = 10) -> RailGeometry:
    """Standard sweep geometry: R = N, alpha = 0.04 a, unit spacing."""
    n = dots + 2 * margin
    return RailGeometry(
        n_sites=n,
        spacing=1.0,
        offset=a_over_d,
        sensitivity=0.04 * a_over_d,
        total_rate=float(n),
        section=(margin, margin + dots - 1),
        margin=margin,
    )


@lru_cache(maxsize=None)
def _five_site_run(chi: float, dt_scale: float = 1.0):
    sched = PulseSchedule(section=(0, 4), T=150.0)
    grid = np.linspace(*sched.window, 501)
    cfg = IntegratorConfig.for_scales(sched.omega_max, chi, scale=dt_scale)
    diag = FIVE_SITE_BLOCK * chi if chi else None
    psi0 = np.zeros(5, dtype=complex)
    psi0[0] = 1.0
    return evolve_pure(lambda t: rail_hamiltonian(t, sched, diag), psi0, grid, cfg, target=4)


def check_clean_transport():
    """Five-site transport without dephasing hits its known fidelity."""
    traj = _five_site_run(0.0)
    fid = traj.observables["fidelity"][-1]
    return [_check("transport", "five_site_clean_fidelity", fid, "0.9996 +/- 5e-4", abs(fid - 0.9996) <= 5e-4)]


def check_tls_transport():
    """chi = 0.15 block (-,+,+,+,+): reduced transfer and one tiny gap early on."""
    traj = _five_site_run(0.15)
    fid = traj.observables["fidelity"][-1]
    out = [_check("transport", "five_site_chi015_fidelity", fid, "0.975 +/- 0.010", abs(fid - 0.975) <= 0.010)]

    sched = PulseSchedule(section=(0, 4), T=150.0)
    grid = np.linspace(*sched.window, 1200)
    sp = track_spectrum(sched, FIVE_SITE_BLOCK * 0.15, grid)
    acs = sp.anticrossings
    out.append(_check("spectrum", "chi015_anticrossing_count", len(acs), "1", len(acs) == 1))
    if acs:
        out.append(
            _check("spectrum", "chi015_anticrossing_gap", acs[0].gap, "in [1e-4, 4e-4]", 1e-4 <= acs[0].gap <= 4e-4)
        )
        out.append(_check("spectrum", "chi015_anticrossing_time", acs[0].time, "< 20", acs[0].time < 20.0))
    return out


def check_strong_coupling():
    """chi = 0.45 sends the electron back; chi = 0.3 oscillates wildly."""
    traj = _five_site_run(0.45)
    origin = traj.observables["populations"][-1, 0]
    target = traj.observables["fidelity"][-1]
    out = [
        _check("transport", "chi045_origin_population", origin, ">= 0.90", origin >= 0.90),
        _check("transport", "chi045_target_population", target, "<= 0.05", target <= 0.05),
    ]
    traj = _five_site_run(0.3)
    target = traj.observables["fidelity"][-1]
    step_two = (traj.times > 50.0) & (traj.times < 100.0)
    std = float(traj.observables["fidelity"][step_two].std())
    out.append(_check("transport", "chi03_target_population", target, "<= 0.90", target <= 0.90))
    out.append(_check("transport", "chi03_step_two_std", std, "> 0.05", std > 0.05))
    return out


@lru_cache(maxsize=None)
def _baseline_run(dots: int, T: float, dt_scale: float = 1.0):
    sched = PulseSchedule(section=(0, dots - 1), T=T)
    grid = np.linspace(*sched.window, 401)
    cfg = IntegratorConfig.for_scales(sched.omega_max, scale=dt_scale)
    psi0 = np.zeros(dots, dtype=complex)
    psi0[0] = 1.0
    return evolve_pure(lambda t: rail_hamiltonian(t, sched), psi0, grid, cfg, target=dots - 1)


def check_nonadiabatic_baseline():
    """Pulse durations are tuned so every chain length loses ~2.4e-5."""
    out = []
    for dots, T in BASELINE_PAIRS:
        loss = 1.0 - _baseline_run(dots, T).observables["fidelity"][-1]
        ok = 1.2e-5 <= loss <= 4.8e-5
        out.append(_check("baseline", f"nonadiabatic_loss_{dots}dots", loss, "2.4e-5 within x2", ok))
    return out


def _sweep_point(args):
    dots, T, aod = args
    margin = 10
    sched = PulseSchedule(section=(margin, margin + dots - 1), T=T)
    grid = np.linspace(*sched.window, 600)
    return transfer_loss_firstorder(sched, sweep_geometry(dots, aod, margin), grid)


def check_measurement_sweep(jobs: int = None, n_points: int = 15):
    """Loss-vs-(a/d) sweep: local-end magnitudes and monotone far tail."""
    from .experiments import sweep_map

    start = time.time()
    aods = np.geomspace(0.03, 30.0, n_points)
    tasks = [(dots, T, aod) for dots, T in BASELINE_PAIRS for aod in aods]
    losses = sweep_map(_sweep_point, tasks, jobs=jobs)
    by_dots = {dots: [] for dots, _ in BASELINE_PAIRS}
    for (dots, _, _), loss in zip(tasks, losses):
        by_dots[dots].append(loss)

    local_11 = _sweep_point((11, 249.0, 0.05))
    local_3 = _sweep_point((3, 150.0, 0.05))
    out = [
        _check("sweep", "local_end_loss_11dots", local_11, "1.1e-2 +/- 20%", abs(local_11 / 1.1e-2 - 1) <= 0.20),
        _check("sweep", "local_end_loss_3dots", local_3, "4e-3 +/- 25%", abs(local_3 / 4e-3 - 1) <= 0.25),
    ]
    for dots, _ in BASELINE_PAIRS:
        if dots < 5:
            continue
        crossover = (dots - 1) / 4.0
        curve = np.array(by_dots[dots])
        tail = curve[aods > crossover]
        decreasing = bool(np.all(np.diff(tail) < 0.0))
        out.append(
            _check("sweep", f"decreasing_beyond_crossover_{dots}dots", float(np.max(np.diff(tail), initial=-1.0)), "all diffs < 0", decreasing)
        )
    elapsed = time.time() - start
    out.append(_check("sweep", "sweep_runtime_seconds", elapsed, "< 120", elapsed < 120.0))
    return out


@lru_cache(maxsize=None)
def _local_limit_lindblad(dt_scale: float = 1.0):
    n = 23
    sched = PulseSchedule(section=(0, 2), T=150.0)
    grid = np.linspace(*sched.window, 401)
    t2 = local_limit_rate(float(n), n, 0.04)
    rates = t2 * (np.ones((3, 3)) - np.eye(3))
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[0, 0] = 1.0
    cfg = IntegratorConfig.for_scales(sched.omega_max, 0.0, n, n, scale=dt_scale)
    traj = evolve_lindblad(lambda t: rail_hamiltonian(t, sched), rates, rho0, grid, cfg, target=2)
    return traj, grid, n


def check_firstorder_vs_exact():
    """First-order loss rate against the full master equation, 3 dots."""
    traj, grid, n = _local_limit_lindblad()
    exact = 1.0 - traj.observables["fidelity"][-1]
    sched = PulseSchedule(section=(0, 2), T=150.0)
    approx = transfer_loss_local(sched, n, float(n), 0.04, grid)
    rel = abs(approx / exact - 1.0)
    return [_check("firstorder", "firstorder_vs_exact_rel_dev", rel, "< 0.10", rel < 0.10)]


def check_rate_formulas():
    """The four decoherence-rate formulas against each other."""
    out = []
    closed = local_limit_rate(1.0, 1, 0.04)
    out.append(
        _check("rates", "local_limit_closed_form", closed, "3.9219456e-4 +/- 1e-8", abs(closed - 3.9219456288597243e-4) <= 1e-8)
    )
    # weak rate reaches its plateau only deep in the a << d regime (the
    # approach is logarithmically slow in the separation)
    for aod in (0.05, 0.1):
        n = 401
        g = RailGeometry(
            n_sites=n, spacing=1.0, offset=aod, sensitivity=0.04 * aod, total_rate=float(n), section=(100, 300), margin=50
        )
        ratio = decoherence_rate_weak(100, 300, g) / saturation_rate(g)
        out.append(
            _check("rates", f"weak_vs_saturation_aod{aod}", ratio, "1 +/- 0.01", abs(ratio - 1.0) <= 0.01)
        )
    g = RailGeometry(n_sites=61, spacing=1.0, offset=1.0, sensitivity=0.04, total_rate=61.0, section=(20, 40))
    worst = 0.0
    for sep in range(1, 21):
        e = decoherence_rate_exact(20, 20 + sep, g)
        w = decoherence_rate_weak(20, 20 + sep, g)
        worst = max(worst, abs(e / w - 1.0))
    out.append(_check("rates", "exact_vs_weak_alpha004", worst, "< 0.05 for all |k-l| <= 20", worst < 0.05))
    return out


@lru_cache(maxsize=None)
def _oracle_run():
    bath = TlsBath(couplings=(0.3, 0.5, 0.7), inversions=(0.0, 0.0, 0.0))
    rho0 = np.full((3, 3), 1.0 / 3.0, dtype=complex)
    t_revival = np.pi / 0.1  # both cos(0.3 t) and cos(0.5 t) hit -1 there
    grid = np.unique(np.concatenate([np.linspace(0.0, 20.0, 201), np.linspace(20.0, t_revival, 121)]))
    traj = joint_evolution_oracle(rho0, bath, None, None, grid)
    return bath, rho0, traj, t_revival


def check_reduced_dynamics_oracle():
    """Closed-form dephasing against the brute-force joint evolution."""
    bath, rho0, traj, t_revival = _oracle_run()
    zero = np.zeros((3, 3))
    err = 0.0
    for t, s in zip(traj.times, traj.states):
        if t > 20.0:
            break
        err = max(err, float(np.max(np.abs(s - analytic_dephasing(rho0, bath, zero, t)))))
    out = [_check("oracle", "oracle_vs_closed_form_max_err", err, "< 1e-6", err < 1e-6)]
    idx = int(np.argmin(np.abs(traj.times - t_revival)))
    revival = abs(traj.states[idx][0, 1]) / abs(rho0[0, 1])
    out.append(_check("oracle", "coherence_revival_fraction", revival, ">= 0.99", revival >= 0.99))
    return out


@lru_cache(maxsize=None)
def _purity_run_population(dt_scale: float = 1.0):
    sched = PulseSchedule(section=(0, 2), T=150.0)
    grid = np.linspace(*sched.window, 501)
    bath = TlsBath.uniform(0.05, 3)
    psi0 = np.zeros(3, dtype=complex)
    psi0[0] = 1.0
    cfg = IntegratorConfig.for_scales(sched.omega_max, 0.05, scale=dt_scale)
    return block_averaged_transport(sched, bath, psi0, None, grid, cfg=cfg)


@lru_cache(maxsize=None)
def _purity_run_superposition():
    sched = PulseSchedule(section=(0, 2), T=150.0)
    w0, w1 = sched.window
    grid = np.linspace(w0, w1 + (w1 - w0), 1001)
    bath = TlsBath.uniform(0.02, 4)
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = psi0[1] = 1.0 / np.sqrt(2.0)
    traj = block_averaged_transport(sched, bath, psi0, None, grid, section_start=1)
    return traj, w1


def check_purity():
    """Rail-TLS entanglement: transient for a population, lasting for a
    transported superposition."""
    traj = _purity_run_population()
    purity = traj.observables["purity"]
    mid = (traj.times > 25.0) & (traj.times < 125.0)
    mid_min = float(purity[mid].min())
    out = [
        _check("purity", "population_midtransport_purity", mid_min, "< 0.98", mid_min < 0.98),
        _check("purity", "population_final_purity", purity[-1], ">= 0.99", purity[-1] >= 0.99),
        _check(
            "purity", "population_final_target", traj.observables["fidelity"][-1], ">= 0.99", traj.observables["fidelity"][-1] >= 0.99
        ),
    ]
    traj, t_end = _purity_run_superposition()
    purity = traj.observables["purity"]
    i_end = int(np.searchsorted(traj.times, t_end))
    final = float(purity[i_end - 1])
    recovery = float(purity[i_end:].max())
    out.append(_check("purity", "superposition_final_purity", final, "<= 0.95", final <= 0.95))
    out.append(_check("purity", "superposition_no_recovery", recovery, "stays <= 0.95 afterwards", recovery <= 0.95))
    return out


def check_integrator_invariants():
    """Trace/Hermiticity/positivity of stored states and RK4 convergence."""
    out = []
    traj, _, _ = _local_limit_lindblad()
    worst_trace = worst_herm = 0.0
    worst_eig = np.inf
    for s in traj.states:
        rep = density_check(s)
        worst_trace = max(worst_trace, rep.trace_err)
        worst_herm = max(worst_herm, rep.herm_err)
        worst_eig = min(worst_eig, rep.min_eigenvalue)
    for source in (_purity_run_population(), _purity_run_superposition()[0]):
        for s in source.states[:: max(1, len(source.states) // 64)]:
            rep = density_check(s)
            worst_trace = max(worst_trace, rep.trace_err)
            worst_herm = max(worst_herm, rep.herm_err)
            worst_eig = min(worst_eig, rep.min_eigenvalue)
    out.append(_check("invariants", "trace_drift", worst_trace, "<= 1e-8", worst_trace <= 1e-8))
    out.append(_check("invariants", "hermiticity_error", worst_herm, "<= 1e-10", worst_herm <= 1e-10))
    out.append(_check("invariants", "min_eigenvalue", worst_eig, ">= -1e-8", worst_eig >= -1e-8))

    fid = _five_site_run(0.0).observables["fidelity"][-1]
    fid_half = _five_site_run(0.0, dt_scale=0.5).observables["fidelity"][-1]
    delta = abs(fid - fid_half)
    out.append(_check("invariants", "step_halving_fidelity_change", delta, "<= 1e-6", delta <= 1e-6))
    return out


def check_dark_state():
    """The transport state is an exact zero mode with zero phase."""
    out = []
    for span in (2, 4, 6, 8, 10):
        sched = PulseSchedule(section=(0, span), T=150.0)
        grid = np.linspace(*sched.window, 301)
        worst = 0.0
        for t in grid:
            vec, _, _ = dark_state(t, sched)
            h = rail_hamiltonian(t, sched)
            worst = max(worst, float(np.linalg.norm(h @ vec) / np.linalg.norm(h)))
        out.append(_check("darkstate", f"zero_mode_residual_span{span}", worst, "<= 1e-12", worst <= 1e-12))
        sp = track_spectrum(sched, None, grid)
        phase = abs(dynamical_phase(sp, sp.track_of_site(0)))
        window = grid[-1] - grid[0]
        out.append(_check("darkstate", f"dynamical_phase_span{span}", phase, "<= 1e-10 x window", phase <= 1e-10 * window))
    return out


CRITERIA = {
    "transport": (check_clean_transport, check_tls_transport, check_strong_coupling),
    "baseline": (check_nonadiabatic_baseline,),
    "sweep": (check_measurement_sweep,),
    "firstorder": (check_firstorder_vs_exact,),
    "rates": (check_rate_formulas,),
    "oracle": (check_reduced_dynamics_oracle,),
    "purity": (check_purity,),
    "invariants": (check_integrator_invariants,),
    "darkstate": (check_dark_state,),
}


def run_all(only: str = None):
    """Run every criterion group (or just `only`); returns (checks, ok)."""
    if only is not None and only not in CRITERIA:
        raise KeyError(f"unknown group {only!r}; choose from {sorted(CRITERIA)}")
    checks = []
    for group, funcs in CRITERIA.items():
        if only is not None and group != only:
            continue
        for func in funcs:
            checks.extend(func())
    return checks, all(c.passed for c in checks)
