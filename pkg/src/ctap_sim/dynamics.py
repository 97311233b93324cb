"""Time evolution: Schrodinger and Lindblad integration, first-order
loss rates in the adiabatic frame, and TLS-block-averaged transport.

Everything uses fixed-step RK4 with the step tied to the fastest scale
in the problem (dt = 0.01 / max(1, omega_max, max |chi|, per-QPC rate)):
the dynamics are smooth, so a deterministic fixed step keeps runs
bit-reproducible and makes step-halving convergence checks meaningful.
"""

from dataclasses import dataclass, field

import numpy as np

from .control import PulseSchedule, dark_state_populations, rail_hamiltonian, track_spectrum
from .errors import BadRates, DimensionMismatch, NormDrift, PositivityLoss, TooManyBlocks
from .linalg import density_check
from .measurement import (
    RailGeometry,
    _central_gamma,
    _distances,
    _tail_sum,
    local_limit_rate,
)
from .tls import TlsBath, block_diagonal, enumerate_blocks

MAX_STORED_POINTS = 2000
MAX_BLOCK_SITES = 14
NORM_DRIFT_LIMIT = 1e-4
POSITIVITY_LIMIT = 1e-6
# how many stored points get the (relatively expensive) eigenvalue
# positivity check; trace and Hermiticity are checked at all of them
POSITIVITY_CHECKS = 32


@dataclass(frozen=True)
class DensityState:
    """Density matrix over the modeled sites, first site = basis_offset."""

    matrix: np.ndarray
    basis_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))
        report = density_check(self.matrix)
        if report.trace_err > 1e-8 or report.herm_err > 1e-10 or report.min_eigenvalue < -1e-8:
            raise PositivityLoss(
                f"invalid density matrix: trace_err={report.trace_err:.2e}, "
                f"herm_err={report.herm_err:.2e}, min_eig={report.min_eigenvalue:.2e}"
            )


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    method: str = "rk4"
    renormalize: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise DimensionMismatch("dt must be positive")
        if self.method != "rk4":
            raise DimensionMismatch("only fixed-step rk4 is supported")

    @classmethod
    def for_scales(cls, omega_max=0.0, chi_max=0.0, total_rate=0.0, n_sites=1, scale=1.0):
        """Default step 0.01 / max(1, omega_max, max|chi|, R/N), times `scale`."""
        fastest = max(1.0, float(omega_max), float(chi_max), float(total_rate) / max(n_sites, 1))
        return cls(dt=scale * 0.01 / fastest)


@dataclass(frozen=True)
class Trajectory:
    """Stored time points, states, and observables recomputable from them.

    states holds pure vectors or density matrices depending on the
    producing evolution; observables is a dict of per-time arrays
    (populations, purity, fidelity, coherence magnitudes).
    """

    times: np.ndarray
    states: list
    observables: dict = field(default_factory=dict)

    @property
    def final_state(self):
        return self.states[-1]


def compute_observables(states, target=None):
    """Populations, purity, fidelity-to-target, coherence magnitudes."""
    pops, purity, coh = [], [], []
    for s in states:
        s = np.asarray(s)
        if s.ndim == 1:
            p = np.abs(s) ** 2
            pops.append(p)
            purity.append(1.0)
            coh.append(np.abs(np.outer(s, s.conj())))
        else:
            pops.append(s.diagonal().real.copy())
            purity.append(float(np.real(np.trace(s @ s))))
            coh.append(np.abs(s))
    out = {
        "populations": np.asarray(pops),
        "purity": np.asarray(purity),
        "coherences": np.asarray(coh),
    }
    if target is not None:
        out["fidelity"] = out["populations"][:, target]
    return out


def _stored_indices(n_points: int) -> list:
    stride = max(1, int(np.ceil((n_points - 1) / MAX_STORED_POINTS))) if n_points > 1 else 1
    return sorted(set(range(0, n_points, stride)) | {n_points - 1})


def _rk4_over_grid(rhs, state, grid, dt, on_store):
    """March `state` along `grid` with fixed substeps, calling on_store
    at every grid point (including the first)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DimensionMismatch("grid must be strictly increasing")
    on_store(0, state)
    for i in range(len(grid) - 1):
        t0, t1 = grid[i], grid[i + 1]
        nsub = max(1, int(np.ceil((t1 - t0) / dt)))
        h = (t1 - t0) / nsub
        t = t0
        for _ in range(nsub):
            k1 = rhs(t, state)
            k2 = rhs(t + 0.5 * h, state + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, state + 0.5 * h * k2)
            k4 = rhs(t + h, state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        on_store(i + 1, state)
    return state


def evolve_pure(hamiltonian, psi0, grid, cfg: IntegratorConfig, target=None) -> Trajectory:
    """Integrate the Schrodinger equation d psi/dt = -i H(t) psi."""
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NormDrift("initial state is not normalized")
    keep = set(_stored_indices(len(grid)))
    times, states = [], []
    max_drift = 0.0

    def on_store(i, s):
        nonlocal max_drift
        drift = abs(np.linalg.norm(s) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > NORM_DRIFT_LIMIT:
            raise NormDrift(f"norm drift {drift:.2e} at t={grid[i]}; reduce dt")
        if i in keep:
            times.append(grid[i])
            states.append(s / np.linalg.norm(s) if cfg.renormalize else s.copy())

    def rhs(t, s):
        return -1j * (hamiltonian(t) @ s)

    _rk4_over_grid(rhs, psi, grid, cfg.dt, on_store)
    obs = compute_observables(states, target=target)
    obs["norm_drift"] = max_drift
    return Trajectory(times=np.asarray(times), states=states, observables=obs)


def evolve_lindblad(hamiltonian, rates, rho0, grid, cfg: IntegratorConfig, target=None) -> Trajectory:
    """Integrate d rho/dt = -i[H, rho] - T * rho (element-wise damping).

    `rates` is the symmetric zero-diagonal matrix of coherence decay
    rates T_kl; because the measurement effect operators are diagonal in
    the site basis, the full dissipator -R rho + R sum_j A_j rho A_j
    reduces exactly to this element-wise form.
    """
    rho0 = rho0.matrix if isinstance(rho0, DensityState) else np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (dim, dim):
        raise BadRates(f"rate matrix shape {rates.shape}, expected {(dim, dim)}")
    keep = _stored_indices(len(grid))
    keep_set = set(keep)
    eig_checks = set(keep[:: max(1, len(keep) // POSITIVITY_CHECKS)]) | {keep[-1]}
    times, states = [], []
    max_drift = 0.0

    def on_store(i, r):
        nonlocal max_drift
        drift = abs(np.real(np.trace(r)) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > NORM_DRIFT_LIMIT:
            raise NormDrift(f"trace drift {drift:.2e} at t={grid[i]}; reduce dt")
        if i in keep_set:
            report = density_check(r) if i in eig_checks else None
            if report is not None and report.min_eigenvalue < -POSITIVITY_LIMIT:
                raise PositivityLoss(
                    f"min eigenvalue {report.min_eigenvalue:.2e} at t={grid[i]}"
                )
            times.append(grid[i])
            states.append(r.copy())

    def rhs(t, r):
        h = hamiltonian(t)
        return -1j * (h @ r - r @ h) - rates * r

    _rk4_over_grid(rhs, rho0, grid, cfg.dt, on_store)
    obs = compute_observables(states, target=target)
    obs["trace_drift"] = max_drift
    return Trajectory(times=np.asarray(times), states=states, observables=obs)


def _transport_populations(sched: PulseSchedule, g, ts, use_tracked: bool):
    """Transported-state site populations over the window: the analytic
    zero-energy state by default, or the numerically tracked eigenstate."""
    if not use_tracked:
        return dark_state_populations(ts, sched)
    sp = track_spectrum(sched, None, ts)
    track = sp.track_of_site(0)
    return np.abs(sp.states[:, :, track]) ** 2


_QPC_CHUNK = 16384


def _qpc_chunks(center: int, radius: int):
    """QPC index range [center-radius, center+radius] in bounded pieces."""
    lo = center - radius
    hi = center + radius + 1
    for start in range(lo, hi, _QPC_CHUNK):
        yield np.arange(start, min(start + _QPC_CHUNK, hi))


def _population_variance(g, js, sites, probs):
    """Var_p(s_j) per (time, QPC) for s_ij = sqrt(1 - alpha/r_ij).

    Centered on one section site before squaring: the far-QPC site
    spread of s is tiny (~|j|^-2) and the raw E[s^2] - E[s]^2 form
    cancels it into rounding noise, which would defeat the tail cutoff.
    """
    s = np.sqrt(1.0 - g.sensitivity / _distances(g, js[:, None], sites[None, :]))  # [j, i]
    u = s - s[:, len(sites) // 2][:, None]
    mean = probs @ u.T  # [t, j]
    mean_sq = probs @ (u**2).T
    return mean_sq - mean**2


def transfer_loss_firstorder(
    sched: PulseSchedule, g: RailGeometry, grid, use_tracked_state: bool = False
) -> float:
    """Transport loss to first order in the measurements.

    The occupation of the transported adiabatic state obeys
    d rho_00/dt = -R [1 - (gamma/N) sum_j (sum_i s_ij p_i(t))^2] rho_00
    with s_ij = sqrt(1 - alpha/r_ij) and p the transported-state site
    populations.  The bracket is rewritten as the per-QPC population
    variance of s (non-negative, terms ~ |j|^-4) so the infinite QPC
    sum truncates cleanly, and rho_00 accumulates exponentially.
    Returns 1 - rho_00(t_end).
    """
    grid = np.asarray(grid, dtype=float)
    m, n = sched.section
    sites = np.arange(m, n + 1)
    probs = _transport_populations(sched, g, grid, use_tracked_state)

    if g.sensitivity == 0.0:
        return 0.0
    gamma = _central_gamma(g)
    center = 0.5 * (m + n)

    # fix the truncation radius at the most delocalized population (the
    # mid-window 50/50 split maximizes the variance terms), then reuse
    # one QPC grid for every time point
    p_mid = probs[len(grid) // 2]

    def term(js):
        return _population_variance(g, np.atleast_1d(js), sites, p_mid[None, :])[0]

    _, radius = _tail_sum(g, term, center)
    rate = np.zeros(len(grid))
    for js in _qpc_chunks(int(round(center)), 2 * radius):
        rate += np.sum(_population_variance(g, js, sites, probs), axis=1)
    rate *= g.rate_per_qpc * gamma
    integral = np.trapezoid(rate, grid)
    return float(1.0 - np.exp(-integral))


def transfer_loss_local(sched: PulseSchedule, n_sites, total_rate, alpha, grid) -> float:
    """First-order transport loss for maximally informative local QPCs:
    the rate collapses to T2 (1 - sum_i p_i(t)^2)."""
    grid = np.asarray(grid, dtype=float)
    probs = dark_state_populations(grid, sched)
    t2 = local_limit_rate(total_rate, n_sites, alpha)
    rate = t2 * (1.0 - np.sum(probs**2, axis=1))
    return float(1.0 - np.exp(-np.trapezoid(rate, grid)))


def coherence_loss_firstorder(
    spectator: int, sched: PulseSchedule, g: RailGeometry, grid, use_tracked_state: bool = False
) -> float:
    """Retention of a coherence between a stored (spectator) site and the
    transported state, to first order in the measurements.

    The decay rate R [1 - (gamma/N) sum_j s_kj sum_i s_ij p_i(t)] is
    rewritten as (R gamma/2N) sum_j [(s_kj - mean_j)^2 + var_j], again
    truncation-friendly.  Returns rho_k0(t_end) / rho_k0(t_0).
    """
    m, n = sched.section
    if m <= spectator <= n:
        raise DimensionMismatch(f"spectator site {spectator} lies inside section {sched.section}")
    grid = np.asarray(grid, dtype=float)
    if g.sensitivity == 0.0:
        return 1.0
    sites = np.arange(m, n + 1)
    probs = _transport_populations(sched, g, grid, use_tracked_state)
    gamma = _central_gamma(g)
    center = 0.5 * (spectator + 0.5 * (m + n))
    p_mid = probs[len(grid) // 2]

    def per_qpc(js, p):
        s = np.sqrt(1.0 - g.sensitivity / _distances(g, js[:, None], sites[None, :]))
        ref = s[:, len(sites) // 2]
        u = s - ref[:, None]
        uk = np.sqrt(1.0 - g.sensitivity / _distances(g, js, spectator)) - ref
        mean = p @ u.T  # [t, j]
        var = p @ (u**2).T - mean**2
        return 0.5 * ((uk[None, :] - mean) ** 2 + var)

    def term(js):
        return per_qpc(np.atleast_1d(js), p_mid[None, :])[0]

    _, radius = _tail_sum(g, term, center)
    rate = np.zeros(len(grid))
    for js in _qpc_chunks(int(round(center)), 2 * radius):
        rate += np.sum(per_qpc(js, probs), axis=1)
    rate *= g.rate_per_qpc * gamma
    return float(np.exp(-np.trapezoid(rate, grid)))


def coherence_retention_local(n_sites, total_rate, alpha, window_length) -> float:
    """Local-limit analog: the rate is the constant T2, so retention is
    exactly exp(-T2 * window)."""
    return float(np.exp(-local_limit_rate(total_rate, n_sites, alpha) * window_length))


def block_averaged_transport(
    sched: PulseSchedule,
    bath: TlsBath,
    rho0a,
    model,
    grid,
    cfg: IntegratorConfig = None,
    section_start: int = None,
    rates: np.ndarray = None,
) -> Trajectory:
    """Transport averaged over all TLS sign blocks.

    Every block evolves independently under the rail Hamiltonian with
    that block's diagonal; the reduced state is the weight-averaged sum.
    `bath` carries one TLS per modeled site (chi = 0 for sites without
    one); when the model covers more sites than the section (stored
    spectator qubits), `section_start` locates the driven section inside
    the modeled range (default: the trailing sites).
    Pure initial states without measurement evolve as state vectors;
    otherwise each block runs the Lindblad equation.
    """
    rho0a = rho0a.matrix if isinstance(rho0a, DensityState) else np.asarray(rho0a, dtype=complex)
    dim = bath.n_tls
    if dim > MAX_BLOCK_SITES:
        raise TooManyBlocks(f"{dim} sites means 2^{dim} blocks; cap is 2^{MAX_BLOCK_SITES}")
    k_sec = sched.n_section_sites
    if section_start is None:
        section_start = dim - k_sec
    if section_start < 0 or section_start + k_sec > dim:
        raise DimensionMismatch("driven section does not fit in the modeled sites")

    pure_input = rho0a.ndim == 1
    use_pure = pure_input and model is None and rates is None
    if pure_input and not use_pure:
        rho0a = np.outer(rho0a, rho0a.conj())

    if rates is None:
        if model is not None:
            sites = np.arange(dim)
            rates = model.rate_matrix(sites)
        else:
            rates = np.zeros((dim, dim))
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (dim, dim):
        raise BadRates(f"rate matrix shape {rates.shape}, expected {(dim, dim)}")

    if cfg is None:
        total_rate = model.geometry.total_rate if model is not None else 0.0
        n_sites = model.geometry.n_sites if model is not None else 1
        cfg = IntegratorConfig.for_scales(
            sched.omega_max, float(np.max(np.abs(bath.couplings), initial=0.0)), total_rate, n_sites
        )

    blocks = enumerate_blocks(bath)
    weights = np.array([b.weight for b in blocks])
    live = weights > 0.0
    diags = np.stack([block_diagonal(b, bath) for b in blocks])[live]
    weights = weights[live]
    nb = len(weights)

    sec_rows = np.arange(section_start, section_start + k_sec - 1)

    def batched_h(t):
        off = sched.couplings(t)
        h = np.zeros((nb, dim, dim), dtype=complex)
        h[:, sec_rows, sec_rows + 1] = off
        h[:, sec_rows + 1, sec_rows] = off
        h[:, np.arange(dim), np.arange(dim)] = diags
        return h

    if use_pure:
        state = np.broadcast_to(rho0a.astype(complex), (nb, dim)).copy()

        def rhs(t, s):
            return -1j * np.einsum("bij,bj->bi", batched_h(t), s)

        def reduce(s):
            return np.einsum("b,bi,bj->ij", weights, s, s.conj())

    else:
        state = np.broadcast_to(rho0a.astype(complex), (nb, dim, dim)).copy()

        def rhs(t, s):
            h = batched_h(t)
            return -1j * (np.einsum("bij,bjk->bik", h, s) - np.einsum("bij,bjk->bik", s, h)) - (
                rates[None, :, :] * s
            )

        def reduce(s):
            return np.einsum("b,bij->ij", weights, s)

    grid = np.asarray(grid, dtype=float)
    keep = _stored_indices(len(grid))
    keep_set = set(keep)
    eig_checks = set(keep[:: max(1, len(keep) // POSITIVITY_CHECKS)]) | {keep[-1]}
    times, states = [], []
    max_drift = 0.0

    def on_store(i, s):
        nonlocal max_drift
        if i not in keep_set:
            return
        red = reduce(s)
        drift = abs(np.real(np.trace(red)) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > NORM_DRIFT_LIMIT:
            raise NormDrift(f"trace drift {drift:.2e} at t={grid[i]}; reduce dt")
        if i in eig_checks:
            report = density_check(red)
            if report.min_eigenvalue < -POSITIVITY_LIMIT:
                raise PositivityLoss(f"min eigenvalue {report.min_eigenvalue:.2e} at t={grid[i]}")
        times.append(grid[i])
        states.append(red)

    _rk4_over_grid(rhs, state, grid, cfg.dt, on_store)
    obs = compute_observables(states, target=section_start + k_sec - 1)
    obs["trace_drift"] = max_drift
    return Trajectory(times=np.asarray(times), states=states, observables=obs)
