"""Dense complex linear algebra shared by the rest of the package.

States are 1-D complex ``numpy`` arrays and operators are square 2-D complex
arrays. Validation helpers check the Hermitian / unitary flags at the
tolerances collected in :data:`TOL`.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    unitary: float = 1e-10
    normalized: float = 1e-12
    orthonormal: float = 1e-10
    independence: float = 1e-8


TOL = Tolerances()


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


def as_state(psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 1:
        raise ValidationError(f"state must be a non-empty 1-D array, got shape {psi.shape}")
    return psi


def as_operator(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"operator must be a square 2-D array, got shape {a.shape}")
    return a


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermiticity_defect(a):
    a = as_operator(a)
    return float(np.max(np.abs(a - a.conj().T)))


def unitarity_defect(u):
    u = as_operator(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_hermitian(a, tol=None):
    # scale-aware: large generators accumulate rounding in their entries
    a = as_operator(a)
    tol = TOL.hermitian if tol is None else tol
    return hermiticity_defect(a) <= tol * max(1.0, float(np.max(np.abs(a))))


def is_unitary(u, tol=None):
    return unitarity_defect(u) <= (TOL.unitary if tol is None else tol)


def require_hermitian(a, name="operator"):
    a = as_operator(a)
    if not is_hermitian(a):
        raise ValidationError(
            f"{name} is not Hermitian: max|A - A^dag| = {hermiticity_defect(a):.3e}"
        )
    return a


def normalize(psi):
    psi = as_state(psi)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValidationError("cannot normalize the zero vector")
    return psi / nrm


def is_normalized(psi, tol=None):
    tol = TOL.normalized if tol is None else tol
    return abs(np.linalg.norm(psi) - 1.0) < tol


def expm_hermitian(h, t):
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = require_hermitian(h, "generator")
    if t == 0:
        return np.eye(h.shape[0], dtype=complex)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


class SpectralPropagator:
    """Cached eigendecomposition of a Hermitian generator.

    ``SpectralPropagator(h)(t)`` equals ``expm_hermitian(h, t)`` but reuses the
    decomposition, which matters when the same pulse is applied many times.
    """

    def __init__(self, h):
        h = require_hermitian(h, "generator")
        self.h = h
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(h)

    def __call__(self, t):
        if t == 0:
            return np.eye(self.h.shape[0], dtype=complex)
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def projector_onto(basis):
    """Orthogonal projector ``sum_i |g_i><g_i|`` onto the span of ``basis``.

    ``basis`` is a sequence of state vectors (or a 2-D array whose rows are the
    vectors). They must be orthonormal within ``TOL.orthonormal``.
    """
    b = np.atleast_2d(np.asarray(basis, dtype=complex))
    gram = b.conj() @ b.T
    defect = float(np.max(np.abs(gram - np.eye(b.shape[0]))))
    if defect > TOL.orthonormal:
        raise ValidationError(f"basis is not orthonormal (Gram defect {defect:.3e})")
    return b.T @ b.conj()


def haar_random_unitary(dim, seed=None, rng=None):
    """Sample a Haar-distributed unitary of size ``dim``.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved into
    ``Q`` so that the decomposition is unique (Mezzadri's construction).
    """
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim, rng, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (a + a.conj().T) / 2


def random_state(dim, rng):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def fidelity(a, b):
    """Overlap ``|<a|b>|**2`` of two normalized states."""
    a, b = as_state(a), as_state(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))
