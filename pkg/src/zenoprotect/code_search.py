"""Iterative search for codewords orthogonal to a set of error generators.

A candidate code of ``I`` codewords in dimension ``N`` is handled as a
supervector: an ``(I, N)`` complex array whose row ``s`` is codeword ``s``.
Every constraint (pairwise orthogonality, vanishing error matrix element) is a
quadratic form ``<C|E_k|C>`` of a block-structured super-matrix ``E_k`` with a
single non-zero ``N x N`` block; :class:`SuperMatrix` stores that block and
its position rather than the full ``(NI) x (NI)`` matrix.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import TOL, ValidationError, is_unitary

BLOCK_ZERO = 1e-14
# raw residual below which the Loewdin-polished iterate is tried for convergence
POLISH_BELOW = 1e-3


class RestartRequired(RuntimeError):
    """A block of the updated supervector vanished and cannot be normalized."""


class HammingBoundWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SuperMatrix:
    kind: str  # "orthonormality" or "error"
    s: int
    t: int
    block: np.ndarray
    n_blocks: int
    generator_index: int = -1

    @property
    def dim(self):
        return self.block.shape[0] * self.n_blocks

    def apply(self, sv):
        out = np.zeros_like(sv)
        out[self.s] = self.block @ sv[self.t]
        return out

    def expectation(self, sv):
        return complex(np.vdot(sv[self.s], self.block @ sv[self.t]))

    def dense(self):
        n = self.block.shape[0]
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[self.s * n:(self.s + 1) * n, self.t * n:(self.t + 1) * n] = self.block
        return out


def hamming_bound(A, M):
    """True when an ``A``-dimensional ancilla can absorb ``M`` generators."""
    if A < 1 or M < 0:
        raise ValidationError("need A >= 1 and M >= 0")
    return A - 1 >= M


def n_super_matrices(I, M):
    return I * (I - 1) // 2 + M * I * (I + 1) // 2


def build_super_matrices(gens, I):
    """The orthonormality family followed by the error family.

    Orthonormality matrices put the identity in each block ``(s, t)`` with
    ``s < t``; error matrices put ``E_m`` in each block with ``s <= t``. Both
    families are listed in row-major block order, the error family grouped
    by ascending ``m``.
    """
    if I < 1:
        raise ValidationError("code dimension I must be >= 1")
    n = gens.dim
    eye = np.eye(n, dtype=complex)
    mats = [
        SuperMatrix("orthonormality", s, t, eye, I)
        for s in range(I)
        for t in range(s + 1, I)
    ]
    for m, e in enumerate(gens):
        mats.extend(
            SuperMatrix("error", s, t, e, I, m)
            for s in range(I)
            for t in range(s, I)
        )
    return mats


def constraint_values(sv, mats):
    return np.array([mat.expectation(sv) for mat in mats], dtype=complex)


def optimal_lambdas(sv, mats):
    """Per-term minimizers of ``sum_k || C + lambda_k E_k C ||^2``.

    Each term is a quadratic in one complex variable, minimized at
    ``lambda_k = -<E_k C|C> / <E_k C|E_k C>`` (zero when ``E_k C`` vanishes).
    """
    sv = np.asarray(sv, dtype=complex)
    if not np.any(sv):
        raise ValidationError("supervector is zero")
    lams = np.zeros(len(mats), dtype=complex)
    for k, mat in enumerate(mats):
        ec = mat.block @ sv[mat.t]
        den = np.vdot(ec, ec).real
        if den > 0:
            lams[k] = -np.vdot(ec, sv[mat.s]) / den
    return lams


def search_direction(sv, mats, lams=None):
    """``Delta C = sum_k lambda_k E_k C``."""
    if lams is None:
        lams = optimal_lambdas(sv, mats)
    delta = np.zeros_like(sv)
    for lam, mat in zip(lams, mats):
        if lam != 0:
            delta[mat.s] += lam * (mat.block @ sv[mat.t])
    return delta


def block_normalize(sv):
    norms = np.linalg.norm(sv, axis=1)
    if np.any(norms < BLOCK_ZERO):
        raise RestartRequired(f"block {int(np.argmin(norms))} vanished (norm {norms.min():.3e})")
    return sv / norms[:, None]


def code_search_step(sv, mats):
    """One update ``C <- blocknorm(C + Delta C / 2)``.

    Raises :class:`RestartRequired` when a block of the update is zero.
    """
    sv = np.asarray(sv, dtype=complex)
    return block_normalize(sv + 0.5 * search_direction(sv, mats))


def random_supervector(I, N, rng):
    while True:
        sv = rng.standard_normal((I, N)) + 1j * rng.standard_normal((I, N))
        try:
            return block_normalize(sv)
        except RestartRequired:  # pragma: no cover - measure-zero draw
            continue


def orthonormalize(sv):
    """Symmetric (Loewdin) orthonormalization, the closest orthonormal set."""
    gram = sv.conj() @ sv.T
    w, v = np.linalg.eigh(gram)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    return (sv.T @ inv_sqrt).T


def constraint_residual(codewords, gens):
    """Largest violation of orthonormality or error orthogonality."""
    cw = np.asarray(codewords, dtype=complex)
    res = float(np.max(np.abs(cw.conj() @ cw.T - np.eye(len(cw)))))
    for e in gens:
        res = max(res, float(np.max(np.abs(cw.conj() @ e @ cw.T))))
    return res


@dataclass(eq=False)
class CodeSpace:
    """Codewords as rows of ``codewords`` plus search diagnostics."""

    codewords: np.ndarray
    residual: float
    converged: bool = True
    iterations: int = 0
    restarts: int = 0
    residual_history: tuple = field(default_factory=tuple)

    @property
    def code_dim(self):
        return self.codewords.shape[0]

    @property
    def dim(self):
        return self.codewords.shape[1]

    def check(self, gens):
        return constraint_residual(self.codewords, gens) <= self.residual * (1 + 1e-9)

    def __eq__(self, other):
        if not isinstance(other, CodeSpace):
            return NotImplemented
        return (
            np.array_equal(self.codewords, other.codewords)
            and self.residual == other.residual
            and self.converged == other.converged
            and self.iterations == other.iterations
            and self.restarts == other.restarts
            and tuple(self.residual_history) == tuple(other.residual_history)
        )


@dataclass(eq=False)
class CodingMatrix:
    """Unitary whose first ``code_dim`` columns are the codewords."""

    matrix: np.ndarray
    code_dim: int

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def codewords(self):
        return self.matrix[:, :self.code_dim].T

    @classmethod
    def identity(cls, dim, code_dim):
        return cls(np.eye(dim, dtype=complex), code_dim)

    def __eq__(self, other):
        if not isinstance(other, CodingMatrix):
            return NotImplemented
        return self.code_dim == other.code_dim and np.array_equal(self.matrix, other.matrix)


def find_code(gens, I, tol=1e-10, max_iter=10_000, seed=None, rng=None):
    """Iterate :func:`code_search_step` from a random start until converged.

    Once the raw constraints fall below ``POLISH_BELOW`` each iterate is
    Loewdin-orthonormalized, and the search stops as soon as the polished
    codewords satisfy every constraint below ``tol``; the polished codewords
    are returned. On
    failure the best iterate found is returned with ``converged=False``.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if I < 1 or I > gens.dim:
        raise ValidationError(f"code dimension {I} not in [1, {gens.dim}]")
    ancilla = gens.dim // I
    if not hamming_bound(ancilla, len(gens)):
        warnings.warn(
            f"Hamming bound violated: A - 1 = {ancilla - 1} < M = {len(gens)}",
            HammingBoundWarning,
            stacklevel=2,
        )
    rng = np.random.default_rng(seed) if rng is None else rng
    mats = build_super_matrices(gens, I)
    sv = random_supervector(I, gens.dim, rng)
    history, restarts = [], 0
    best_res, best = np.inf, None
    for it in range(max_iter + 1):
        r = float(np.max(np.abs(constraint_values(sv, mats)))) if mats else 0.0
        history.append(r)
        if r < best_res or best is None:
            best_res, best = r, sv
        if r < max(tol, POLISH_BELOW):
            polished = orthonormalize(sv)
            res = constraint_residual(polished, gens)
            if res < tol:
                return CodeSpace(polished, res, True, it, restarts, tuple(history))
        if it == max_iter:
            break
        try:
            sv = code_search_step(sv, mats)
        except RestartRequired:
            restarts += 1
            sv = random_supervector(I, gens.dim, rng)
    polished = orthonormalize(best)
    return CodeSpace(polished, constraint_residual(polished, gens), False, max_iter, restarts, tuple(history))


def complete_coding_matrix(code, seed=None, max_attempts=8):
    """Extend the codewords to a unitary by orthonormalizing random vectors."""
    if not code.residual < 1e-6:
        raise ValidationError(f"code residual {code.residual:.3e} too large to complete")
    cw = np.asarray(code.codewords, dtype=complex)
    I, n = cw.shape
    if float(np.max(np.abs(cw.conj() @ cw.T - np.eye(I)))) > TOL.orthonormal:
        raise ValidationError("codewords are not orthonormal; orthonormalize before completing")
    head = cw.T
    if I == n:
        return CodingMatrix(head.copy(), I)
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        z = rng.standard_normal((n, n - I)) + 1j * rng.standard_normal((n, n - I))
        for _ in range(2):
            z = z - head @ (head.conj().T @ z)
        q, r = np.linalg.qr(z)
        if np.min(np.abs(np.diag(r))) < 1e-8:
            continue
        q = q - head @ (head.conj().T @ q)
        q, _ = np.linalg.qr(q)
        u = np.concatenate([head, q], axis=1)
        if is_unitary(u):
            return CodingMatrix(u, I)
    raise RuntimeError(f"coding-matrix completion failed after {max_attempts} attempts")
