"""Two-level-system environment: couplings, blocks, and reduced dynamics.

Each rail site n may host one TLS coupled as chi_n |n><n| sigma_z,n with
sigma_z |1> = +|1>.  The joint Hamiltonian is block-diagonal over TLS
basis configurations; with completely mixed TLSs (omega = 0) the reduced
coherences pick up cos(chi t) factors that revive periodically, which is
the non-Markovian signature of this bath.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRates,
    DimensionMismatch,
    DimensionTooLarge,
    NormDrift,
    SingularTime,
    TooManyBlocks,
)

SINGULARITY_TOL = 1e-9
MAX_ENUM_TLS = 20
MAX_ORACLE_SITES = 6


@dataclass(frozen=True)
class TlsBath:
    """One TLS per modeled site: couplings chi_n and initial inversions
    omega_n = Tr[rho_n sigma_z].  chi_n = 0 means no TLS on that site."""

    couplings: tuple
    inversions: tuple

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        object.__setattr__(self, "inversions", tuple(float(w) for w in self.inversions))
        if len(self.couplings) != len(self.inversions):
            raise DimensionMismatch("couplings and inversions must have equal length")
        if any(abs(w) > 1.0 for w in self.inversions):
            raise DimensionMismatch("inversions must lie in [-1, 1]")

    @property
    def n_tls(self) -> int:
        return len(self.couplings)

    @classmethod
    def uniform(cls, chi: float, n: int, omega: float = 0.0) -> "TlsBath":
        return cls(couplings=(chi,) * n, inversions=(omega,) * n)


@dataclass(frozen=True)
class BlockConfig:
    """One TLS basis configuration: |0> maps to sign -1, |1> to +1."""

    signs: tuple
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if any(s not in (-1, 1) for s in self.signs):
            raise DimensionMismatch("signs must be -1 or +1")
        if not 0.0 <= self.weight <= 1.0:
            raise DimensionMismatch(f"weight {self.weight} outside [0, 1]")


def dephasing_coefficients(n: int, t: float, bath: TlsBath):
    """Instantaneous dephasing rate gamma_n(t) and energy shift Delta_n(t).

    gamma - i*Delta = chi (sin(chi t) - i w cos(chi t)) /
                          (cos(chi t) + i w sin(chi t)).
    Diagnostic only: the generator blows up where the denominator
    vanishes (w = 0, chi t near pi/2), and we error out there.
    """
    chi = bath.couplings[n]
    w = bath.inversions[n]
    denom = complex(np.cos(chi * t), w * np.sin(chi * t))
    if abs(denom) < SINGULARITY_TOL:
        raise SingularTime(f"dephasing generator singular at chi*t = {chi * t}")
    val = chi * complex(np.sin(chi * t), -w * np.cos(chi * t)) / denom
    return val.real, -val.imag


def enumerate_blocks(bath: TlsBath) -> list:
    """All 2^K TLS sign patterns with their initial-state weights.

    Ordering is |0>-major with the last TLS as the fastest index, so the
    first block is all-|0> (signs all -1) and block 1 flips only the
    last TLS.  Weights are products of (1 + s_n w_n)/2.
    """
    k = bath.n_tls
    if k > MAX_ENUM_TLS:
        raise TooManyBlocks(f"{k} TLSs means 2^{k} blocks; cap is 2^{MAX_ENUM_TLS}")
    blocks = []
    for b in range(2**k):
        signs = tuple(1 if (b >> (k - 1 - n)) & 1 else -1 for n in range(k))
        weight = 1.0
        for s, w in zip(signs, bath.inversions):
            weight *= 0.5 * (1.0 + s * w)
        blocks.append(BlockConfig(signs=signs, weight=weight))
    return blocks


def block_diagonal(config: BlockConfig, bath: TlsBath) -> np.ndarray:
    """Site energies s_n chi_n of one block of the joint Hamiltonian."""
    if len(config.signs) != bath.n_tls:
        raise DimensionMismatch("block signs and bath couplings differ in length")
    return np.asarray(config.signs, dtype=float) * np.asarray(bath.couplings)


def _validate_rates(rates: np.ndarray, k: int) -> np.ndarray:
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (k, k):
        raise BadRates(f"rate matrix shape {rates.shape}, expected {(k, k)}")
    if np.max(np.abs(rates - rates.T)) > 1e-12:
        raise BadRates("rate matrix must be symmetric")
    if np.max(np.abs(np.diag(rates))) > 1e-12:
        raise BadRates("rate matrix must have zero diagonal")
    if np.min(rates) < 0.0:
        raise BadRates("rate matrix must be non-negative")
    return rates


def analytic_dephasing(rho0: np.ndarray, bath: TlsBath, rates: np.ndarray, t: float) -> np.ndarray:
    """Closed-form reduced state for completely mixed TLSs and no drive.

    rho_kl(t) = exp(-T_kl t) cos(chi_k t) cos(chi_l t) rho_kl(0) for
    k != l; populations are untouched (pure dephasing).
    """
    if any(w != 0.0 for w in bath.inversions):
        raise BadRates("closed form requires completely mixed TLSs (all inversions 0)")
    rho0 = np.asarray(rho0, dtype=complex)
    k = bath.n_tls
    if rho0.shape != (k, k):
        raise DimensionMismatch(f"state shape {rho0.shape}, expected {(k, k)}")
    rates = _validate_rates(rates, k)
    cos = np.cos(np.asarray(bath.couplings) * t)
    factor = np.exp(-rates * t) * np.outer(cos, cos)
    np.fill_diagonal(factor, 1.0)
    return factor * rho0


def _tls_z_values(k: int) -> np.ndarray:
    """sigma_z eigenvalues per (TLS index, configuration index)."""
    configs = np.arange(2**k)
    z = np.empty((k, 2**k))
    for n in range(k):
        z[n] = np.where((configs >> (k - 1 - n)) & 1, 1.0, -1.0)
    return z


def joint_evolution_oracle(rho0a, bath, schedule, model, grid, sites=None):
    """Brute-force reference: evolve the full rail x TLS density matrix.

    The joint space is (sites) x (2^K TLS configurations); the
    interaction is diagonal there, the drive acts as H_A(t) x 1, and the
    measurement dissipator (being diagonal in the site basis) damps each
    joint coherence at the rail rate of its site pair.  Returns a
    Trajectory of partial-traced rail states.
    """
    from .dynamics import IntegratorConfig, Trajectory, compute_observables

    rho0a = np.asarray(rho0a, dtype=complex)
    k = bath.n_tls
    if k > MAX_ORACLE_SITES:
        raise DimensionTooLarge(f"oracle supports at most {MAX_ORACLE_SITES} sites, got {k}")
    if rho0a.shape != (k, k):
        raise DimensionMismatch(f"state shape {rho0a.shape}, expected {(k, k)}")
    nb = 2**k
    dim = k * nb

    # joint index = site * 2^K + TLS configuration
    z = _tls_z_values(k)
    chis = np.asarray(bath.couplings)
    h_diag = np.zeros(dim)
    for n in range(k):
        h_diag[n * nb : (n + 1) * nb] = chis[n] * z[n]

    weights = np.ones(nb)
    for n in range(k):
        weights *= 0.5 * (1.0 + z[n] * np.asarray(bath.inversions)[n])
    rho = np.kron(rho0a, np.diag(weights)).astype(complex)

    t_joint = np.zeros((dim, dim))
    rate = 0.0
    if model is not None:
        if sites is None:
            sites = np.arange(k)
        t_rail = model.rate_matrix(sites)
        t_joint = np.kron(t_rail, np.ones((nb, nb)))
        rate = model.geometry.rate_per_qpc * model.geometry.n_sites

    omega_max = schedule.omega_max if schedule is not None else 0.0
    cfg = IntegratorConfig.for_scales(omega_max, float(np.max(np.abs(chis), initial=0.0)), rate)

    eye_tls = np.eye(nb)

    def hamiltonian(t):
        h = np.diag(h_diag.astype(complex))
        if schedule is not None:
            from .control import rail_hamiltonian

            h += np.kron(rail_hamiltonian(t, schedule), eye_tls)
        return h

    def rhs(t, r):
        h = hamiltonian(t)
        return -1j * (h @ r - r @ h) - t_joint * r

    grid = np.asarray(grid, dtype=float)
    stride = max(1, int(np.ceil((len(grid) - 1) / 2000)))
    keep = sorted(set(range(0, len(grid), stride)) | {len(grid) - 1})

    times, states = [grid[0]], []

    def reduce(r):
        return np.einsum("ikjk->ij", r.reshape(k, nb, k, nb))

    states.append(reduce(rho))
    for i0, i1 in zip(grid[:-1], grid[1:]):
        span = i1 - i0
        nsub = max(1, int(np.ceil(span / cfg.dt)))
        h = span / nsub
        t = i0
        for _ in range(nsub):
            k1 = rhs(t, rho)
            k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2)
            k4 = rhs(t + h, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        times.append(i1)
        states.append(reduce(rho))

    times = np.asarray(times)[keep]
    states = [states[i] for i in keep]
    for s in states:
        if abs(s.trace() - 1.0) > 1e-8:
            raise NormDrift(f"oracle trace drift {abs(s.trace() - 1.0):.2e} exceeds 1e-8")
    observables = compute_observables(states, target=k - 1)
    return Trajectory(times=times, states=states, observables=observables)
