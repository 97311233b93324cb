"""Dense complex Hermitian eigensolver and density-matrix diagnostics.

All matrices here are small (dimension well below ~200), so a cyclic
Jacobi sweep is accurate, dependency-free and fully deterministic:
two runs on the same input produce bit-identical output.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DidNotConverge, NonHermitianInput

HERMITICITY_TOL = 1e-12
OFFDIAG_THRESHOLD = 1e-14
MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues ascending; orthonormal eigenvectors as columns.

    Each column is phase-fixed so that its largest-magnitude component
    is real and non-negative.
    """

    values: np.ndarray
    vectors: np.ndarray


def _check_hermitian(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NonHermitianInput("expected a square matrix of dimension >= 1")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonHermitianInput("matrix has non-finite entries")
    herm_err = np.max(np.abs(m - m.conj().T))
    if herm_err > HERMITICITY_TOL:
        raise NonHermitianInput(f"max |M - M^+| = {herm_err:.3e} exceeds {HERMITICITY_TOL}")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        pivot = out[idx, k]
        mag = abs(pivot)
        if mag > 0.0:
            out[:, k] = out[:, k] * (pivot.conjugate() / mag)
        # guard against a residual negative zero in the pivot
        out[idx, k] = abs(out[idx, k])
    return out


def hermitian_eigendecompose(m: np.ndarray) -> EigenDecomposition:
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Sweeps rotate every upper-triangular pivot in row-major order until
    the off-diagonal Frobenius norm drops below OFFDIAG_THRESHOLD times
    the matrix Frobenius norm.
    """
    m = np.asarray(m, dtype=complex)
    _check_hermitian(m)
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)  # symmetrize away the tolerated asymmetry
    v = np.eye(n, dtype=complex)

    norm = np.linalg.norm(a)
    if n == 1 or norm == 0.0:
        values = a.real.diagonal().copy()
        return EigenDecomposition(values=values, vectors=_fix_phases(v))
    threshold = OFFDIAG_THRESHOLD * norm

    converged = False
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= threshold / n:
                    continue
                # absorb the phase so the 2x2 pivot block is real
                u = apq / mag
                a[:, p] *= u
                a[p, :] *= u.conjugate()
                v[:, p] *= u
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        converged = np.linalg.norm(a - np.diag(np.diag(a))) <= threshold
    if not converged:
        raise DidNotConverge(f"Jacobi did not reach threshold in {MAX_SWEEPS} sweeps")

    values = a.real.diagonal().copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=_fix_phases(v[:, order]))


@dataclass(frozen=True)
class DensityReport:
    trace_err: float
    herm_err: float
    min_eigenvalue: float

    def ok(self, tol: float) -> bool:
        return self.trace_err <= tol and self.herm_err <= tol and self.min_eigenvalue >= -tol


def density_check(rho: np.ndarray, tol: float = 1e-8) -> DensityReport:
    """Trace, Hermiticity and positivity diagnostics for a density matrix.

    Pure diagnostic: the caller decides pass/fail against `tol`.
    """
    rho = np.asarray(rho, dtype=complex)
    trace_err = abs(rho.trace() - 1.0)
    herm_err = float(np.max(np.abs(rho - rho.conj().T)))
    sym = 0.5 * (rho + rho.conj().T)
    decomp = hermitian_eigendecompose(sym)
    return DensityReport(
        trace_err=float(trace_err),
        herm_err=herm_err,
        min_eigenvalue=float(decomp.values[0]),
    )
