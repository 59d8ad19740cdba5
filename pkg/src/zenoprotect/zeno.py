"""Repeated coding / error / decoding / projection cycles.

Tensor ordering is ancilla-major: the compound space is
``H_A (x) H_I`` so that with the ancilla reference state ``|0>`` the
information subspace is spanned by the first ``I`` coordinate vectors, which
are exactly the columns a :class:`~zenoprotect.code_search.CodingMatrix`
maps onto its codewords.
"""
import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .core import TOL, ValidationError, as_state, fidelity, is_normalized
from .error_model import evolve_exact

PROJECTION_MODES = ("deterministic", "stochastic")
NOISE_MODES = ("continuous", "fresh")
TRACE_COLUMNS = ("cycle", "t", "survival", "fidelity", "leak")
SUBSPACE_TOL = 1e-8
# per-cycle losses below this are encode/decode round-off (leak amplitude ~1e-14)
LOSS_FLOOR = 1e-28


@dataclass(frozen=True, eq=False)
class AncillaLayout:
    info_dim: int
    ancilla_dim: int
    ancilla_state: np.ndarray = None

    def __post_init__(self):
        if self.info_dim < 1 or self.ancilla_dim < 1:
            raise ValidationError("info_dim and ancilla_dim must be >= 1")
        alpha = self.ancilla_state
        if alpha is None:
            alpha = np.zeros(self.ancilla_dim, dtype=complex)
            alpha[0] = 1.0
        alpha = np.asarray(alpha, dtype=complex)
        if alpha.shape != (self.ancilla_dim,):
            raise ValidationError("ancilla_state has the wrong dimension")
        if not is_normalized(alpha):
            raise ValidationError("ancilla_state must be normalized")
        object.__setattr__(self, "ancilla_state", alpha)

    @property
    def total_dim(self):
        return self.info_dim * self.ancilla_dim

    def basis(self):
        """``(N, I)`` isometry with columns ``|alpha> (x) |nu_i>``."""
        return np.kron(self.ancilla_state[:, None], np.eye(self.info_dim))

    def embed(self, psi_info):
        return np.kron(self.ancilla_state, as_state(psi_info))


@dataclass(frozen=True)
class ZenoConfig:
    tau_Z: float
    n_cycles: int = 1
    dt: float = None
    projection_mode: str = "deterministic"
    noise_mode: str = "continuous"
    seed: int = 0

    def __post_init__(self):
        if not self.tau_Z > 0:
            raise ValidationError("tau_Z must be positive")
        dt = self.tau_Z if self.dt is None else self.dt
        if not 0 < dt <= self.tau_Z * (1 + 1e-12):
            raise ValidationError("need 0 < dt <= tau_Z")
        object.__setattr__(self, "dt", float(dt))
        if self.n_cycles < 1:
            raise ValidationError("n_cycles must be >= 1")
        if self.projection_mode not in PROJECTION_MODES:
            raise ValidationError(f"unknown projection mode {self.projection_mode!r}")
        if self.noise_mode not in NOISE_MODES:
            raise ValidationError(f"unknown noise mode {self.noise_mode!r}")


@dataclass
class CycleRecord:
    cycle: int
    t: float
    survival: float
    fidelity: float
    leak: float
    failed: bool = False


@dataclass(eq=False)
class ZenoRunRecord:
    survival: np.ndarray
    fidelity: np.ndarray
    leak: np.ndarray
    times: np.ndarray
    cumulative_survival: float
    failed_cycle: int = -1
    final_state: np.ndarray = field(default=None, repr=False)

    @property
    def n_cycles(self):
        return len(self.survival)

    @property
    def final_fidelity(self):
        return float(self.fidelity[-1])

    def per_cycle_loss(self):
        # leak**2 == 1 - survival, without the cancellation
        return float(np.mean(self.leak**2))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# zenoprotect zeno-trace v1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for j in range(self.n_cycles):
            w.writerow([j + 1] + [format(float(x), ".17g") for x in
                                  (self.times[j], self.survival[j], self.fidelity[j], self.leak[j])])
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, ZenoRunRecord):
            return NotImplemented
        return (
            all(np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("survival", "fidelity", "leak", "times"))
            and self.cumulative_survival == other.cumulative_survival
            and self.failed_cycle == other.failed_cycle
        )


def _matrix(coding):
    return np.asarray(getattr(coding, "matrix", coding), dtype=complex)


def _basis_for(coding, basis):
    if basis is not None:
        b = np.asarray(basis, dtype=complex)
        if b.ndim != 2:
            raise ValidationError("basis must be an (N, I) isometry")
        if float(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1])))) > TOL.orthonormal:
            raise ValidationError("basis columns are not orthonormal")
        return b
    I = getattr(coding, "code_dim", None)
    if I is None:
        raise ValidationError("a basis is required when coding is a bare matrix")
    return np.eye(_matrix(coding).shape[0], dtype=complex)[:, :I]


def _fields_for_cycle(fields, cfg, cycle):
    if cfg.noise_mode == "fresh":
        return [f.realization(cycle) for f in fields]
    return list(fields)


def zeno_cycle(psi, C, gens, fields, cfg, t_start=0.0, basis=None, decoder=None,
               reference=None, rng=None, cycle=0):
    """One encode, evolve for ``tau_Z``, decode, project cycle.

    ``decoder`` defaults to the exact inverse ``C^dag``; pass another unitary
    to replay a synthesized decoding sequence. In continuous noise mode the
    fields are evaluated on ``[t_start, t_start + tau_Z]``; in fresh mode each
    cycle gets a new field realization on ``[0, tau_Z]``.

    Returns ``(state, CycleRecord)``. A failed stochastic projection returns
    ``(None, record)`` with ``record.failed`` set.
    """
    psi = as_state(psi)
    b = _basis_for(C, basis)
    u = _matrix(C)
    if u.shape[0] != psi.size or gens.dim != psi.size:
        raise ValidationError("state, coding matrix and generators differ in dimension")
    inside = b @ (b.conj().T @ psi)
    if np.linalg.norm(psi - inside) > SUBSPACE_TOL:
        raise ValidationError("state lies outside the information subspace")
    reference = psi if reference is None else as_state(reference)
    dec = u.conj().T if decoder is None else np.asarray(decoder, dtype=complex)

    flds = _fields_for_cycle(fields, cfg, cycle)
    t0 = 0.0 if cfg.noise_mode == "fresh" else t_start
    phi = evolve_exact(u @ psi, gens, flds, t0, t0 + cfg.tau_Z, cfg.dt)
    phi = dec @ phi
    kept = b @ (b.conj().T @ phi)
    p = float(min(1.0, np.vdot(kept, kept).real))
    leak = float(np.linalg.norm(phi - kept))
    t_end = t_start + cfg.tau_Z

    if cfg.projection_mode == "stochastic":
        if rng is None:
            raise ValidationError("stochastic projection needs an rng")
        if rng.random() >= p:
            return None, CycleRecord(cycle + 1, t_end, p, 0.0, leak, failed=True)
    out = kept / math.sqrt(p) if p > 0 else kept
    return out, CycleRecord(cycle + 1, t_end, p, fidelity(out, reference), leak)


def run_protection(psi0, C, gens, fields, cfg, basis=None, decoder=None, t_start=0.0):
    """Chain ``cfg.n_cycles`` cycles with continuous field time."""
    psi = as_state(psi0)
    rng = np.random.default_rng(cfg.seed)
    recs = []
    state, t, failed = psi, t_start, -1
    for j in range(cfg.n_cycles):
        state, rec = zeno_cycle(state, C, gens, fields, cfg, t, basis=basis, decoder=decoder,
                                reference=psi, rng=rng, cycle=j)
        recs.append(rec)
        t = rec.t
        if rec.failed:
            failed = j + 1
            break
    surv = np.array([r.survival for r in recs])
    return ZenoRunRecord(
        survival=surv,
        fidelity=np.array([r.fidelity for r in recs]),
        leak=np.array([r.leak for r in recs]),
        times=np.array([r.t for r in recs]),
        cumulative_survival=float(np.prod(surv)),
        failed_cycle=failed,
        final_state=state,
    )


def run_unprotected(psi0, gens, fields, total_time, dt, tau_Z=None, t_start=0.0):
    """Free evolution; fidelity to ``psi0`` sampled every ``tau_Z``.

    Returns ``(times, fidelities)``. Without ``tau_Z`` only the final time is
    sampled.
    """
    psi0 = as_state(psi0)
    step = total_time if tau_Z is None else tau_Z
    n = max(1, int(round(total_time / step)))
    times, fids = [], []
    psi, t = psi0, t_start
    for j in range(n):
        t1 = t_start + (j + 1) * step
        psi = evolve_exact(psi, gens, fields, t, t1, dt)
        t = t1
        times.append(t)
        fids.append(fidelity(psi / np.linalg.norm(psi), psi0))
    return np.array(times), np.array(fids)


def effective_hamiltonian(C, gens, layout, field_values, basis=None):
    """``h_e = sum_m f_m <alpha| C^dag E_m C |alpha>`` on the information space.

    The contraction with ``|alpha>`` uses ``layout.basis()`` unless an
    explicit subspace basis is given.
    """
    u = _matrix(C)
    if u.shape[0] != layout.total_dim or gens.dim != layout.total_dim:
        raise ValidationError("coding matrix, generators and layout differ in dimension")
    f = np.asarray(field_values, dtype=float)
    if f.shape != (len(gens),):
        raise ValidationError(f"expected {len(gens)} field values")
    b = layout.basis() if basis is None else np.asarray(basis, dtype=complex)
    cb = u @ b
    h = np.zeros((b.shape[1], b.shape[1]), dtype=complex)
    for fm, e in zip(f, gens):
        h += fm * (cb.conj().T @ e @ cb)
    return h


@dataclass
class ProtectionSetup:
    psi0: np.ndarray
    coding: object
    gens: object
    fields: list
    substeps: int = 8
    n_cycles: int = 4
    total_time: float = None
    basis: np.ndarray = None


@dataclass
class ScalingTable:
    tau_Z: np.ndarray
    per_cycle_infidelity: np.ndarray
    cumulative_infidelity: np.ndarray
    final_infidelity: np.ndarray
    slope: float

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# zenoprotect tauZ-scaling v1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("tau_Z", "per_cycle_infidelity", "cumulative_infidelity", "final_infidelity"))
        for row in zip(self.tau_Z, self.per_cycle_infidelity, self.cumulative_infidelity,
                       self.final_infidelity):
            w.writerow([format(float(x), ".17g") for x in row])
        buf.write(f"# slope {'undefined' if self.slope is None else format(self.slope, '.17g')}\n")
        return buf.getvalue()


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` vs ``log x``; None if any ``y <= 0``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(y <= 0) or len(x) < 2:
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_vs_tauZ(setup, tauZ_list):
    """Per-cycle survival loss, cumulative loss and final infidelity versus ``tau_Z``.

    Every ``tau_Z`` runs over the same time window, ``setup.total_time``
    (default ``setup.n_cycles * max(tauZ_list)``), so time-dependent fields
    are sampled alike at every point. Per-cycle infidelity is the mean
    survival loss over the cycles in that window; values under
    ``LOSS_FLOOR`` are round-off and are reported as 0.
    """
    taus = np.sort(np.asarray(tauZ_list, dtype=float))
    if len(taus) < 2 or taus[-1] / taus[0] < 10 * (1 - 1e-9):
        raise ValidationError("tauZ_list must span at least one decade")
    total = setup.total_time or setup.n_cycles * taus[-1]
    per, cum, fin = [], [], []
    for tz in taus:
        n_total = max(1, int(round(total / tz)))
        cfg = ZenoConfig(tz, n_total, tz / setup.substeps)
        rec = run_protection(setup.psi0, setup.coding, setup.gens, setup.fields, cfg, basis=setup.basis)
        per.append(rec.per_cycle_loss())
        cum.append(1.0 - rec.cumulative_survival)
        fin.append(1.0 - rec.final_fidelity)
    per = np.array(per)
    per[per < LOSS_FLOOR] = 0.0
    return ScalingTable(taus, per, np.array(cum), np.array(fin), loglog_slope(taus, per))
