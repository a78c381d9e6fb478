"""Small complex linear-algebra helpers used throughout the package."""

import numpy as np

from .errors import NonUnitaryError

TWO_PI = 2.0 * np.pi


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a Haar-distributed unitary.

    QR decomposition of a complex Gaussian matrix, with the diagonal of R
    phase-corrected so the distribution is exactly Haar.
    """
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U U^dag - I."""
    u = np.asarray(u)
    return float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])))


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return unitarity_defect(u) < tol


def assert_unitary(u: np.ndarray, tol: float = 1e-10, what: str = "matrix") -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitaryError(float("inf"), tol, what)
    defect = unitarity_defect(u)
    if defect >= tol:
        raise NonUnitaryError(defect, tol, what)
    return u


def wrap_angle(theta):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    return np.mod(theta, TWO_PI)


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Average-gate-overlap fidelity |Tr(U^dag V)|^2 / dim^2."""
    u = np.asarray(u)
    v = np.asarray(v)
    dim = u.shape[0]
    return float(np.abs(np.trace(u.conj().T @ v)) ** 2) / dim**2
