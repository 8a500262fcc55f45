"""Dense complex linear algebra for multi-qubit states and operators.

Everything here is a pure function on numpy arrays.  Matrices are plain
``np.ndarray`` of dtype complex128; correctness is expressed through
explicit numerical tolerances collected in :class:`Tolerances` rather
than through wrapper classes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError

DEFAULT_DIM_CAP = 2 ** 14


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used throughout the package (one knob per check)."""

    hermitian_input: float = 1e-12   # relative, on eigensystem inputs
    reconstruction: float = 1e-10    # relative, ||H - V diag V*|| after eigh
    unitarity: float = 1e-10         # ||U*U - I||_max
    state_trace: float = 1e-10       # |tr(rho) - 1|
    state_hermiticity: float = 1e-10
    state_psd: float = 1e-10         # eigenvalues >= -state_psd
    trace_preservation: float = 1e-12
    quadrature_rel: float = 1e-10
    engine_match: float = 1e-8       # fast vs oracle vs closed form
    revival: float = 1e-7            # witness: minimal rise of E counted as revival
    step_halving: float = 1e-6       # auto slice refinement target on E(t)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class HermitianEigensystem:
    """Ascending eigenvalues and the unitary of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _max_abs(a: np.ndarray) -> float:
    return float(np.abs(a).max()) if a.size else 0.0


def require_finite(a: np.ndarray, what: str = "matrix") -> None:
    if not np.isfinite(a).all():
        raise ContractError(f"{what} contains NaN or Inf entries")


def hermiticity_residual(h: np.ndarray) -> float:
    """Relative deviation from h = h*."""
    scale = max(1.0, _max_abs(h))
    return _max_abs(h - h.conj().T) / scale


def kron(a: np.ndarray, b: np.ndarray, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Kronecker product with a hard cap on the output dimension."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("kron expects 2-d matrices")
    if a.shape[0] * b.shape[0] > cap or a.shape[1] * b.shape[1] > cap:
        raise DimensionError(
            f"kron output {a.shape[0] * b.shape[0]}x{a.shape[1] * b.shape[1]} "
            f"exceeds dimension cap {cap}"
        )
    require_finite(a, "kron operand")
    require_finite(b, "kron operand")
    return np.kron(a, b)


def hermitian_eigensystem(
    h: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES
) -> HermitianEigensystem:
    """Diagonalize a Hermitian matrix, checking the input and the result.

    Raises ContractError if the input fails the Hermiticity precondition or
    the reconstruction / orthonormality residuals exceed their tolerances.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got {h.shape}")
    require_finite(h, "eigensystem input")
    if hermiticity_residual(h) > tol.hermitian_input:
        raise ContractError(
            f"matrix is not Hermitian: residual {hermiticity_residual(h):.3e} "
            f"> {tol.hermitian_input:.0e}"
        )
    vals, vecs = np.linalg.eigh(h)
    scale = max(1.0, _max_abs(h))
    recon = _max_abs((vecs * vals) @ vecs.conj().T - h)
    if recon > tol.reconstruction * scale:
        raise ContractError(f"eigendecomposition reconstruction residual {recon:.3e}")
    ortho = _max_abs(vecs.conj().T @ vecs - np.eye(h.shape[0]))
    if ortho > tol.reconstruction:
        raise ContractError(f"eigenvector orthonormality residual {ortho:.3e}")
    return HermitianEigensystem(vals, vecs)


def unitary_from_generator(
    h: np.ndarray, s: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """exp(-i*s*h) for Hermitian h, via eigendecomposition."""
    eig = hermitian_eigensystem(h, tol)
    phases = np.exp(-1j * s * eig.eigenvalues)
    u = (eig.eigenvectors * phases) @ eig.eigenvectors.conj().T
    check_unitary(u, tol)
    return u


def check_unitary(u: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Validate ||U*U - I||_max and return the residual."""
    res = _max_abs(u.conj().T @ u - np.eye(u.shape[0]))
    if res > tol.unitarity:
        raise ContractError(f"unitarity residual {res:.3e} > {tol.unitarity:.0e}")
    return res


def check_state(rho: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Validate trace, Hermiticity and positivity of a density matrix."""
    rho = np.asarray(rho)
    require_finite(rho, "state")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol.state_trace:
        raise ContractError(f"state trace {tr} deviates from 1 beyond {tol.state_trace:.0e}")
    if hermiticity_residual(rho) > tol.state_hermiticity:
        raise ContractError("state is not Hermitian within tolerance")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -tol.state_psd:
        raise ContractError(f"state has eigenvalue {lo:.3e} < -{tol.state_psd:.0e}")


def partial_trace(rho: np.ndarray, dims: list[int], keep: tuple[int, ...] | list[int],
                  tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : square matrix on the tensor product of subsystems with sizes ``dims``
    dims : subsystem dimensions, in tensor order
    keep : indices (into dims) of the subsystems to keep, order preserved
    """
    rho = np.asarray(rho, dtype=complex)
    dims = list(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"state shape {rho.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    if not keep:
        raise DimensionError("cannot trace out every subsystem")
    tr_in = complex(np.trace(rho))
    work = rho.reshape(dims + dims)
    remaining = dims[:]
    for idx in sorted((i for i in range(len(dims)) if i not in keep), reverse=True):
        work = np.trace(work, axis1=idx, axis2=idx + len(remaining))
        del remaining[idx]
    out_dim = int(np.prod(remaining))
    out = work.reshape(out_dim, out_dim)
    if abs(complex(np.trace(out)) - tr_in) > tol.trace_preservation * max(1.0, abs(tr_in)):
        raise ContractError("partial trace failed to preserve the trace")
    return out


def partial_transpose_system(rho_as: np.ndarray) -> np.ndarray:
    """Partial transpose of a 4x4 ancilla (x) system state over the system factor."""
    rho_as = np.asarray(rho_as, dtype=complex)
    if rho_as.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 two-qubit state, got {rho_as.shape}")
    return rho_as.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def pt_spectrum(rho_as: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Ascending eigenvalues of the partial transpose over the system qubit."""
    check_state(rho_as, tol)
    return np.linalg.eigvalsh(partial_transpose_system(rho_as))


def pt_min_eigenvalue(rho_as: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Minimum eigenvalue of the partial transpose; negative iff entangled."""
    return float(pt_spectrum(rho_as, tol)[0])
