"""Adiabatic single-electron transport on a measured quantum-dot rail.

A small numpy/scipy simulator for coherent transport by adiabatic
passage (CTAP) along a chain of tunnel-coupled quantum dots, with two
decoherence channels: Markovian dephasing from weak non-local charge
sensing (quantum point contacts) and non-Markovian dephasing from
two-level fluctuators.
"""

from .control import (
    PulseSchedule,
    Spectrum,
    adiabaticity_margin,
    crossing_precondition,
    dark_state,
    dynamical_phase,
    pump_stokes,
    rail_hamiltonian,
    track_spectrum,
)
from .dynamics import (
    DensityState,
    IntegratorConfig,
    Trajectory,
    block_averaged_transport,
    coherence_loss_firstorder,
    coherence_retention_local,
    compute_observables,
    evolve_lindblad,
    evolve_pure,
    transfer_loss_firstorder,
    transfer_loss_local,
)
from .errors import CtapSimError
from .linalg import EigenDecomposition, density_check, hermitian_eigendecompose
from .measurement import (
    MeasurementModel,
    RailGeometry,
    build_measurement_model,
    decoherence_rate_exact,
    decoherence_rate_weak,
    local_limit_rate,
    local_measurement_model,
    qpc_distance,
    saturation_rate,
)
from .tls import (
    BlockConfig,
    TlsBath,
    analytic_dephasing,
    block_diagonal,
    dephasing_coefficients,
    enumerate_blocks,
    joint_evolution_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "BlockConfig",
    "CtapSimError",
    "DensityState",
    "EigenDecomposition",
    "IntegratorConfig",
    "MeasurementModel",
    "PulseSchedule",
    "RailGeometry",
    "Spectrum",
    "TlsBath",
    "Trajectory",
    "adiabaticity_margin",
    "analytic_dephasing",
    "block_averaged_transport",
    "block_diagonal",
    "build_measurement_model",
    "coherence_loss_firstorder",
    "coherence_retention_local",
    "compute_observables",
    "crossing_precondition",
    "dark_state",
    "decoherence_rate_exact",
    "decoherence_rate_weak",
    "density_check",
    "dephasing_coefficients",
    "dynamical_phase",
    "enumerate_blocks",
    "evolve_lindblad",
    "evolve_pure",
    "hermitian_eigendecompose",
    "joint_evolution_oracle",
    "local_limit_rate",
    "local_measurement_model",
    "pump_stokes",
    "qpc_distance",
    "rail_hamiltonian",
    "saturation_rate",
    "track_spectrum",
    "transfer_loss_firstorder",
    "transfer_loss_local",
]
