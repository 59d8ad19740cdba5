"""Non-holonomic control: timing sequences of two alternating Hamiltonians.

The propagator for timings ``tau_1..tau_n`` is

    U(tau) = exp(-i H_{x_n} tau_n) ... exp(-i H_{x_2} tau_2) exp(-i H_{x_1} tau_1)

with ``x_1 = a, x_2 = b, x_3 = a, ...`` (the first pulse applied is ``H_a``).
:func:`synthesize_timings` adjusts a short sequence until ``U`` maps the
information basis onto a code for the given error generators.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .code_search import build_super_matrices, optimal_lambdas, search_direction
from .core import SpectralPropagator, ValidationError, as_operator, require_hermitian

DEFAULT_DELTA_N = 2
DEFAULT_ALPHA_GRID = tuple(2.0 ** -j for j in range(11))
PIVOT_TOL = 1e-10


class DegenerateConfiguration(RuntimeError):
    """The linearized constraint system lost rank at the current timings."""


class ControlPair:
    def __init__(self, H_a, H_b, sign_reversible=True):
        H_a = require_hermitian(as_operator(H_a), "H_a")
        H_b = require_hermitian(as_operator(H_b), "H_b")
        if H_a.shape != H_b.shape:
            raise ValidationError(f"H_a {H_a.shape} and H_b {H_b.shape} differ in shape")
        self.H_a, self.H_b = H_a, H_b
        self.sign_reversible = bool(sign_reversible)
        self._props = (SpectralPropagator(H_a), SpectralPropagator(H_b))

    @property
    def dim(self):
        return self.H_a.shape[0]

    def hamiltonian(self, j):
        """Hamiltonian of pulse ``j`` (0-based)."""
        return self.H_a if j % 2 == 0 else self.H_b

    def pulse(self, j, t):
        return self._props[j % 2](t)

    def __eq__(self, other):
        if not isinstance(other, ControlPair):
            return NotImplemented
        return (
            self.sign_reversible == other.sign_reversible
            and np.array_equal(self.H_a, other.H_a)
            and np.array_equal(self.H_b, other.H_b)
        )

    def __repr__(self):
        return f"ControlPair(dim={self.dim}, sign_reversible={self.sign_reversible})"

    @classmethod
    def random(cls, dim, seed=None, rng=None, scale=1.0):
        from .core import random_hermitian

        rng = np.random.default_rng(seed) if rng is None else rng
        return cls(random_hermitian(dim, rng, scale), random_hermitian(dim, rng, scale))


@dataclass(eq=False)
class TimingVector:
    timings: np.ndarray
    free_set: tuple = ()

    def __post_init__(self):
        self.timings = np.asarray(self.timings, dtype=float).ravel()
        self.free_set = tuple(int(j) for j in self.free_set)
        if any(not 0 <= j < len(self.timings) for j in self.free_set):
            raise ValidationError(f"free_set {self.free_set} out of range")

    @property
    def n(self):
        return len(self.timings)

    def __len__(self):
        return len(self.timings)

    def __eq__(self, other):
        if not isinstance(other, TimingVector):
            return NotImplemented
        return self.free_set == other.free_set and np.array_equal(self.timings, other.timings)


def _timings(tau):
    t = tau.timings if isinstance(tau, TimingVector) else np.asarray(tau, dtype=float).ravel()
    if np.any(t < 0):
        raise ValidationError("timings must be non-negative")
    return t


def _pulses(ctrl, t):
    return [ctrl.pulse(j, tj) for j, tj in enumerate(t)]


def propagator(ctrl, tau):
    u = np.eye(ctrl.dim, dtype=complex)
    for f in _pulses(ctrl, _timings(tau)):
        u = f @ u
    return u


def propagator_derivatives(ctrl, tau):
    """``dU/dtau_j`` for every pulse, as an array of shape ``(n, N, N)``."""
    t = _timings(tau)
    fs = _pulses(ctrl, t)
    n, dim = len(fs), ctrl.dim
    right = np.empty((n, dim, dim), dtype=complex)  # f_j ... f_1
    acc = np.eye(dim, dtype=complex)
    for j in range(n):
        acc = fs[j] @ acc
        right[j] = acc
    out = np.empty_like(right)
    left = np.eye(dim, dtype=complex)  # f_n ... f_{j+1}
    for j in reversed(range(n)):
        out[j] = left @ (-1j * ctrl.hamiltonian(j)) @ right[j]
        left = left @ fs[j]
    return out


def information_basis(dim, I):
    """Supervector of the first ``I`` coordinate vectors."""
    return np.eye(dim, dtype=complex)[:I]


def _error_mats(mats):
    for m in mats:
        if m.kind != "error":
            raise ValidationError("timing synthesis only takes error-kind super-matrices")
    return list(mats)


def test_function_G(tau, ctrl, C_sv, mats):
    """``sum_k |<C|U^dag E_k U|C>|^2`` over the error super-matrices."""
    mats = _error_mats(mats)
    uc = (propagator(ctrl, tau) @ np.asarray(C_sv, dtype=complex).T).T
    return float(sum(abs(m.expectation(uc)) ** 2 for m in mats))


test_function_G.__test__ = False  # keep pytest from collecting it


def _constraint_rows(ctrl, tau, C_sv, mats):
    u = propagator(ctrl, tau)
    du = propagator_derivatives(ctrl, tau)
    c0 = (u @ C_sv.T).T
    dc = np.einsum("jab,sb->jsa", du, C_sv)  # (n, I, N)
    rows = np.empty((len(mats), len(du)), dtype=complex)
    for k, m in enumerate(mats):
        rows[k] = (
            dc[:, m.s].conj() @ (m.block @ c0[m.t])
            + (m.block @ dc[:, m.t].T).T @ c0[m.s].conj()
        )
    return c0, rows


def build_linear_system(tau0, ctrl, C_sv, deltaC, mats, pivot_tol=PIVOT_TOL):
    """Real linear system ``S dtau = W`` steering the constraints along ``deltaC``.

    Each complex equation equates the first-order change of ``<C|U^dag E_k U|C>``
    to the change produced by moving ``U C`` to ``U C + deltaC / 2`` (divided
    by the squared norm of the moved supervector). Real and imaginary parts
    give two rows each; rows that are numerically trivial or linearly
    dependent on earlier ones are removed by pivoted QR, leaving ``M I^2``.
    """
    mats = _error_mats(mats)
    C_sv = np.asarray(C_sv, dtype=complex)
    I = C_sv.shape[0]
    M = len({m.generator_index for m in mats})
    target = M * I * I
    c0, rows = _constraint_rows(ctrl, tau0, C_sv, mats)
    c1 = c0 + 0.5 * np.asarray(deltaC, dtype=complex)
    norm1 = np.vdot(c1, c1).real
    w = np.array([(m.expectation(c1) - m.expectation(c0)) / norm1 for m in mats])

    S = np.concatenate([rows.real, rows.imag])
    W = np.concatenate([w.real, w.imag])
    aug = np.column_stack([S, W])
    scale = max(1.0, float(np.max(np.abs(aug))))
    keep = np.flatnonzero(np.linalg.norm(aug, axis=1) > pivot_tol * scale)
    if len(keep):
        _, r, piv = qr(aug[keep].T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.sum(diag > pivot_tol * diag[0])) if diag[0] > 0 else 0
        keep = np.sort(keep[piv[:min(rank, target)]])
    S, W = S[keep], W[keep]
    if len(keep) < target or np.linalg.matrix_rank(S, tol=pivot_tol * scale) < target:
        raise DegenerateConfiguration(
            f"linearized system has rank below {target} at the current timings"
        )
    return S, W


@dataclass(eq=False)
class SynthesisReport:
    final_timings: TimingVector
    G_history: list
    rotations: int
    converged: bool
    iterations: int = 0
    restarts: int = 0
    accepted: list = field(default_factory=list)
    control: "ControlPair" = None

    def __eq__(self, other):
        if not isinstance(other, SynthesisReport):
            return NotImplemented
        return (
            self.final_timings == other.final_timings
            and list(self.G_history) == list(other.G_history)
            and self.rotations == other.rotations
            and self.converged == other.converged
            and self.iterations == other.iterations
            and self.restarts == other.restarts
            and list(self.accepted) == list(other.accepted)
            and self.control == other.control
        )


def _redraw_free_set(rng, n, size, previous):
    previous = tuple(sorted(previous))
    while True:
        fs = tuple(sorted(int(j) for j in rng.choice(n, size, replace=False)))
        if fs != previous:
            return fs


def synthesize_timings(
    ctrl,
    code,
    gens,
    tau_range,
    tol=1e-6,
    max_iter=500,
    seed=None,
    delta_n=DEFAULT_DELTA_N,
    alpha_grid=DEFAULT_ALPHA_GRID,
    tau0=None,
    free_set=None,
    basis=None,
):
    """Drive the test function G below ``tol`` by adjusting pulse timings.

    ``code`` fixes the information dimension (a :class:`CodeSpace` or an
    int). Each iteration solves the square subsystem restricted to the
    current free timings, then accepts the first ``alpha`` from
    ``alpha_grid`` that lowers G; if none does, the free set is rotated.
    """
    I = code if isinstance(code, (int, np.integer)) else code.code_dim
    M = len(gens)
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if delta_n < 1:
        raise ValidationError("delta_n must be >= 1")
    if gens.dim != ctrl.dim:
        raise ValidationError("control pair and generators differ in dimension")
    lo, hi = float(tau_range[0]), float(tau_range[1])
    if not 0 <= lo < hi:
        raise ValidationError(f"invalid timing range {tau_range}")
    rng = np.random.default_rng(seed)
    n_free = M * I * I
    n_c = n_free + delta_n
    C_sv = information_basis(ctrl.dim, I) if basis is None else np.asarray(basis, dtype=complex)
    mats = [m for m in build_super_matrices(gens, I) if m.kind == "error"]

    tau = rng.uniform(lo, hi, n_c) if tau0 is None else np.clip(np.asarray(tau0, dtype=float), lo, hi)
    if len(tau) != n_c:
        raise ValidationError(f"tau0 has {len(tau)} entries, expected {n_c}")
    if free_set is None:
        free = tuple(sorted(int(j) for j in rng.choice(n_c, n_free, replace=False)))
    else:
        free = tuple(sorted(int(j) for j in free_set))
        if len(free) != n_free:
            raise ValidationError(f"free_set must have {n_free} entries")

    g = test_function_G(tau, ctrl, C_sv, mats)
    history, accepted = [g], [True]
    best_tau, best_g = tau.copy(), g
    rotations = restarts = it = 0
    while g >= tol and it < max_iter:
        it += 1
        c0 = (propagator(ctrl, tau) @ C_sv.T).T
        delta = search_direction(c0, mats, optimal_lambdas(c0, mats))
        try:
            S, W = build_linear_system(tau, ctrl, C_sv, delta, mats)
        except DegenerateConfiguration:
            restarts += 1
            tau = rng.uniform(lo, hi, n_c)
            g = test_function_G(tau, ctrl, C_sv, mats)
            history.append(g)
            accepted.append(False)
            if g < best_g:
                best_tau, best_g = tau.copy(), g
            continue
        sub = S[:, list(free)]
        try:
            step = np.linalg.solve(sub, W)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(sub, W, rcond=None)[0]
        dtau = np.zeros(n_c)
        dtau[list(free)] = step
        moved = False
        for alpha in alpha_grid:
            cand = np.clip(tau + alpha * dtau, lo, hi)
            gc = test_function_G(cand, ctrl, C_sv, mats)
            if gc < g:
                tau, g, moved = cand, gc, True
                break
        if not moved:
            rotations += 1
            free = _redraw_free_set(rng, n_c, n_free, free)
        history.append(g)
        accepted.append(moved)
        if g < best_g:
            best_tau, best_g = tau.copy(), g
    return SynthesisReport(
        final_timings=TimingVector(best_tau, free),
        G_history=history,
        rotations=rotations,
        converged=bool(best_g < tol),
        iterations=it,
        restarts=restarts,
        accepted=accepted,
        control=ctrl,
    )


def decode_by_sign_reversal(ctrl, tau):
    """Control pair and timings whose propagator is ``U(tau)^dag``.

    Both Hamiltonians change sign and the sequence runs backwards. For an
    even number of pulses the reversed sequence starts with ``-H_b``, so the
    returned pair is ``(-H_b, -H_a)`` to keep the alternation convention.
    """
    if not ctrl.sign_reversible:
        raise ValidationError(
            "control pair is not sign reversible; use the exact inverse instead"
        )
    tv = tau if isinstance(tau, TimingVector) else TimingVector(tau)
    n = tv.n
    if n % 2 == 1:
        pair = ControlPair(-ctrl.H_a, -ctrl.H_b, True)
    else:
        pair = ControlPair(-ctrl.H_b, -ctrl.H_a, True)
    rev = TimingVector(tv.timings[::-1].copy(), tuple(sorted(n - 1 - j for j in tv.free_set)))
    return pair, rev


def _realify(x):
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def lie_algebra_rank(ctrl, depth=12, include_identity=False, tol=1e-9):
    """Dimension of the real Lie algebra generated by ``iH_a`` and ``iH_b``.

    Brackets are nested up to ``depth`` generators per word (``depth = 1``
    is just the span of the two generators). With ``include_identity`` the
    element ``i I`` is added, which accounts for the global phase; a pair is
    fully controllable on U(N) when the returned rank is ``N**2``.
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    gens = [1j * ctrl.H_a, 1j * ctrl.H_b]
    if include_identity:
        gens.append(1j * np.eye(ctrl.dim))
    basis_vecs, basis_mats = [], []

    full = ctrl.dim**2

    def add(x):
        x = 0.5 * (x - x.conj().T)  # drop round-off outside the anti-Hermitian space
        nrm = np.linalg.norm(x)
        if nrm == 0 or len(basis_vecs) == full:
            return None
        v = _realify(x / nrm)
        for _ in range(2):
            for b in basis_vecs:
                v = v - (b @ v) * b
        r = np.linalg.norm(v)
        if r <= tol:
            return None
        basis_vecs.append(v / r)
        basis_mats.append(x / nrm)
        return x / nrm

    frontier = [y for y in (add(g) for g in gens) if y is not None]
    for _ in range(depth - 1):
        if not frontier or len(basis_vecs) == full:
            break
        new = []
        for g in gens:
            for y in frontier:
                z = add(g @ y - y @ g)
                if z is not None:
                    new.append(z)
        frontier = new
    return len(basis_vecs)
