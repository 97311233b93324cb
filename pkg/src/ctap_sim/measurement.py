"""QPC rail geometry and the Markovian measurement model.

Each quantum dot sits a distance `offset` (a) from its QPC; neighboring
dots are `spacing` (d) apart.  A QPC at site j detects the electron with
probability reduced by 1 - alpha/r for an electron at distance r, which
makes every QPC a weak, non-local position measurement.  The effect
operators are diagonal in the site basis, so the Lindblad dissipator
acts element-wise on the density matrix: each coherence rho_kl decays
at a rate returned by `decoherence_rate_exact`.

Rates carry the per-QPC detection rate total_rate/n_sites; experiment
configs follow the total_rate = n_sites convention so that rate is 1.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidGeometry

DEFAULT_TAIL_CUTOFF = 1e-12
# minimum half-width (in units of max(1, a/d)) of the symmetric QPC sums
# before the relative-tail cutoff may stop them
MIN_TAIL_RADIUS = 16


@dataclass(frozen=True)
class RailGeometry:
    """Dot/QPC layout and truncation policy for the infinite-rail sums."""

    n_sites: int
    spacing: float
    offset: float
    sensitivity: float
    total_rate: float
    section: tuple[int, int] = (0, 2)
    margin: int = 10
    tail_cutoff: float = DEFAULT_TAIL_CUTOFF

    def __post_init__(self):
        if self.n_sites < 1:
            raise InvalidGeometry("n_sites must be positive")
        if self.spacing <= 0 or self.offset <= 0:
            raise InvalidGeometry("spacing and offset must be positive")
        if self.sensitivity < 0 or self.total_rate < 0:
            raise InvalidGeometry("sensitivity and total_rate must be non-negative")
        if self.sensitivity >= self.offset:
            raise InvalidGeometry(
                f"sensitivity alpha={self.sensitivity} must be < offset a={self.offset}"
            )
        m, n = self.section
        if not (0 <= m <= n < self.n_sites):
            raise InvalidGeometry(f"section {self.section} outside rail of {self.n_sites} sites")
        if self.n_sites < (n - m + 1) + 2 * self.margin:
            raise InvalidGeometry(
                f"n_sites={self.n_sites} too small for section span {n - m + 1} "
                f"with margin {self.margin} on each side"
            )

    @property
    def rate_per_qpc(self) -> float:
        return self.total_rate / self.n_sites


def qpc_distance(i: int, j: int, g: RailGeometry) -> float:
    """Distance between QPC i and dot j: sqrt(a^2 + (|i-j| d)^2)."""
    return float(np.hypot(g.offset, abs(i - j) * g.spacing))


def _distances(g: RailGeometry, site: float, offsets: np.ndarray) -> np.ndarray:
    return np.hypot(g.offset, (offsets - site) * g.spacing)


def _tail_sum(g: RailGeometry, term, center: float) -> tuple[float, int]:
    """Sum term(j) over QPC indices j symmetrically outward from `center`.

    Shells are evaluated in doubling chunks; the sum stops once the
    outermost shell falls below tail_cutoff relative to the running sum
    (after a geometry-scaled minimum radius).  Returns the sum and the
    truncation radius actually used.
    """
    min_radius = int(np.ceil(MIN_TAIL_RADIUS * max(1.0, g.offset / g.spacing)))
    c = int(round(center))
    total = float(term(np.array([c])).sum())
    lo, hi = 1, max(2 * min_radius, 32)
    radius = 0
    while lo < 10**7:
        radii = np.arange(lo, hi)
        shells = term(c - radii) + term(c + radii)
        total += float(shells.sum())
        radius = int(radii[-1])
        if radius >= min_radius and shells[-1] < g.tail_cutoff * max(abs(total), 1e-300):
            break
        lo, hi = hi, 2 * hi
    return total, radius


@dataclass(frozen=True)
class MeasurementModel:
    """Effect operators (stored as diagonals) plus their normalization.

    effect_diagonals[j, i] is the site-i diagonal entry of the j-th QPC
    effect operator; rows sum to gamma/n-ish, columns to exactly 1
    (completeness).  kind is "geometric" for the 1 - alpha/r model and
    "local" for the delta-function limit.
    """

    geometry: RailGeometry
    gamma: float
    effect_diagonals: np.ndarray
    lindblad_diagonals: np.ndarray = field(repr=False)
    kind: str = "geometric"

    def rate_matrix(self, sites: np.ndarray | list[int]) -> np.ndarray:
        """Coherence decay rates T_kl for the requested rail sites."""
        sites = np.asarray(sites, dtype=int)
        k = len(sites)
        t = np.zeros((k, k))
        for a in range(k):
            for b in range(a + 1, k):
                if self.kind == "local":
                    r = local_limit_rate(
                        self.geometry.total_rate, self.geometry.n_sites, self.geometry.sensitivity
                    )
                else:
                    r = decoherence_rate_exact(int(sites[a]), int(sites[b]), self.geometry)
                t[a, b] = t[b, a] = r
        return t


def build_measurement_model(g: RailGeometry) -> MeasurementModel:
    """Effect operators pi_j = (gamma/N)(1 - alpha/r_ij) |i><i| summed over i.

    Normalization is per site so that sum_j pi_j is exactly the identity
    on the finite rail; the reported scalar gamma is the central-site
    value 1 + sum_j alpha/(N r_ij), which all interior sites share to
    high accuracy.
    """
    n = g.n_sites
    idx = np.arange(n)
    r = np.hypot(g.offset, (idx[:, None] - idx[None, :]) * g.spacing)  # [qpc j, site i]
    weights = 1.0 - g.sensitivity / r
    site_sums = weights.sum(axis=0)  # per site i: sum over QPCs
    diagonals = weights / site_sums[None, :]
    center = n // 2
    gamma = n / site_sums[center]
    return MeasurementModel(
        geometry=g,
        gamma=float(gamma),
        effect_diagonals=diagonals,
        lindblad_diagonals=np.sqrt(diagonals),
        kind="geometric",
    )


def local_measurement_model(g: RailGeometry) -> MeasurementModel:
    """Maximal-information limit: each QPC sees only its own dot.

    Effect diagonals are u(1 + beta delta_ij) with the peak height beta
    calibrated so the induced coherence decay rate equals the closed
    form of `local_limit_rate` exactly (the raw substitution differs at
    third order in alpha and by an O(alpha/N) normalization).
    """
    n = g.n_sites
    alpha = g.sensitivity
    target = 2.0 + alpha - 2.0 * np.sqrt(1.0 + alpha)

    def mismatch(beta):
        return n * (beta + 2.0 - 2.0 * np.sqrt(1.0 + beta)) / (n + beta) - target

    if alpha == 0.0:
        beta = 0.0
    else:
        beta = brentq(mismatch, alpha, 4.0 * alpha + 1e-9, xtol=1e-16, rtol=1e-15)
    u = 1.0 / (n + beta)
    diagonals = np.full((n, n), u)
    np.fill_diagonal(diagonals, u * (1.0 + beta))
    return MeasurementModel(
        geometry=g,
        gamma=float(n * u * (1.0 + beta)),
        effect_diagonals=diagonals,
        lindblad_diagonals=np.sqrt(diagonals),
        kind="local",
    )


def decoherence_rate_exact(k: int, l: int, g: RailGeometry) -> float:
    """Coherence decay rate between sites k and l under all QPCs.

    Evaluated in the numerically stable difference form
    (R gamma / 2N) sum_j (s_kj - s_lj)^2 with s_ij = sqrt(1 - alpha/r_ij),
    whose terms fall off like |j|^-4; equal to
    R [1 - (gamma/N) sum_j s_kj s_lj] by completeness, and exactly zero
    for k = l.
    """
    if k == l or g.sensitivity == 0.0:
        return 0.0
    gamma = _central_gamma(g)

    def term(j):
        sk = np.sqrt(1.0 - g.sensitivity / _distances(g, k, j))
        sl = np.sqrt(1.0 - g.sensitivity / _distances(g, l, j))
        return (sk - sl) ** 2

    total, _ = _tail_sum(g, term, 0.5 * (k + l))
    return 0.5 * g.rate_per_qpc * gamma * total


def decoherence_rate_weak(k: int, l: int, g: RailGeometry) -> float:
    """Weak-measurement (alpha/a << 1) limit of the decay rate:
    (R alpha^2 / 8N) sum_j (1/r_kj - 1/r_lj)^2."""
    if k == l or g.sensitivity == 0.0:
        return 0.0

    def term(j):
        return (1.0 / _distances(g, k, j) - 1.0 / _distances(g, l, j)) ** 2

    total, _ = _tail_sum(g, term, 0.5 * (k + l))
    return g.rate_per_qpc * g.sensitivity**2 / 8.0 * total


def saturation_rate(g: RailGeometry) -> float:
    """Large-separation plateau of the weak rate.

    For |k-l| d >> a the cross terms vanish and the weak rate tends to
    (R alpha^2 / 4N d^2) * pi coth(pi a/d) / (a/d), via
    sum_j 1/(a^2 + j^2 d^2) = (pi/(a d)) coth(pi a/d).  Approach to the
    plateau is logarithmically slow in the separation.
    """
    aod = g.offset / g.spacing
    return (
        g.rate_per_qpc
        * g.sensitivity**2
        / (4.0 * g.spacing**2)
        * np.pi
        / np.tanh(np.pi * aod)
        / aod
    )


def local_limit_rate(total_rate: float, n_sites: int, alpha: float) -> float:
    """Decay rate for maximally informative local measurements:
    (R/N)(2 + alpha - 2 sqrt(1 + alpha))."""
    if alpha < 0:
        raise InvalidGeometry("alpha must be non-negative")
    return total_rate / n_sites * (2.0 + alpha - 2.0 * np.sqrt(1.0 + alpha))


def _central_gamma(g: RailGeometry) -> float:
    n = g.n_sites
    idx = np.arange(n)
    center = n // 2
    corr = np.sum(1.0 / _distances(g, center, idx))
    return 1.0 / (1.0 - g.sensitivity * corr / n)
