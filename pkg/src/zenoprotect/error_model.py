"""Error Hamiltonians ``H(t) = sum_m f_m(t) E_m`` and their action on states."""
import math
import warnings
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .core import TOL, ValidationError, as_operator, as_state, expm_hermitian, random_hermitian

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

ZENO_REGIME_THRESHOLD = 0.1


class ZenoRegimeWarning(UserWarning):
    pass


class GeneratorSet:
    """An ordered family of linearly independent Hermitian error generators.

    Parameters
    ----------
    generators : array_like, shape (M, N, N)
        The matrices ``E_m``. ``M`` may be zero, in which case ``dim`` is
        required.
    labels : sequence of str, optional
    dim : int, optional
    """

    def __init__(self, generators, labels=None, dim=None):
        try:
            gens = np.array(generators, dtype=complex)
        except ValueError as exc:
            raise ValidationError("generators must all share one square shape") from exc
        if gens.size == 0:
            if dim is None:
                raise ValidationError("an empty generator set needs an explicit dim")
            gens = np.zeros((0, dim, dim), dtype=complex)
        if gens.ndim != 3 or gens.shape[1] != gens.shape[2]:
            raise ValidationError(f"generators must have shape (M, N, N), got {gens.shape}")
        if dim is not None and gens.shape[1] != dim:
            raise ValidationError(f"generator dimension {gens.shape[1]} != dim {dim}")
        for m, e in enumerate(gens):
            defect = float(np.max(np.abs(e - e.conj().T)))
            if defect > TOL.hermitian * max(1.0, float(np.max(np.abs(e)))):
                raise ValidationError(f"generator {m} is not Hermitian (defect {defect:.3e})")
        if len(gens) > 0:
            sv = np.linalg.svd(gens.reshape(len(gens), -1), compute_uv=False)
            if sv[-1] <= TOL.independence * sv[0]:
                raise ValidationError(
                    f"generators are linearly dependent (smallest singular value {sv[-1]:.3e})"
                )
        if labels is None:
            labels = [f"E{m + 1}" for m in range(len(gens))]
        labels = tuple(str(s) for s in labels)
        if len(labels) != len(gens):
            raise ValidationError("labels and generators differ in length")
        gens.setflags(write=False)
        self.generators = gens
        self.labels = labels

    @property
    def dim(self):
        return self.generators.shape[1]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, m):
        return self.generators[m]

    def __eq__(self, other):
        if not isinstance(other, GeneratorSet):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.generators.shape == other.generators.shape
            and np.array_equal(self.generators, other.generators)
        )

    def __repr__(self):
        return f"GeneratorSet(dim={self.dim}, M={len(self)}, labels={list(self.labels)})"

    def hamiltonian(self, field_values):
        field_values = np.asarray(field_values, dtype=float)
        if field_values.shape != (len(self),):
            raise ValidationError(f"expected {len(self)} field values, got {field_values.shape}")
        if len(self) == 0:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return np.tensordot(field_values, self.generators, axes=1)

    def spectral_norms(self):
        return np.array([np.linalg.norm(e, 2) for e in self.generators])

    @classmethod
    def random(cls, dim, M, seed=None, rng=None, scale=1.0):
        rng = np.random.default_rng(seed) if rng is None else rng
        return cls([random_hermitian(dim, rng, scale) for _ in range(M)], dim=dim)

    @classmethod
    def few_body(cls, n_qubits, terms):
        """Build from ``(support, pauli_string)`` pairs, e.g. ``((0, 2), "ZZ")``."""
        mats, labels = [], []
        for support, word in terms:
            mats.append(few_body_generator(n_qubits, support, pauli_product(word)))
            labels.append(f"{word}@{','.join(str(q) for q in _support_tuple(support))}")
        return cls(mats, labels=labels, dim=2**n_qubits)


@dataclass(frozen=True)
class FieldProfile:
    """Classical field ``f(t)`` multiplying one error generator.

    ``kind`` is ``"constant"`` (``f = amplitude``), ``"sinusoid"``
    (``f = amplitude * cos(2 pi frequency t + phase)``) or
    ``"piecewise-random"`` (independent uniform draws in
    ``[-amplitude, amplitude]`` held for ``segment`` time units).

    Piecewise-random draws are keyed by ``(seed, draw, segment index)`` so
    evaluation is deterministic and order independent. :meth:`realization`
    returns the same profile with a different ``draw`` key, which is how
    per-interval fresh noise is generated.
    """

    kind: str = "constant"
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    segment: float = 1.0
    seed: int = 0
    draw: int = 0

    def __post_init__(self):
        if self.kind not in ("constant", "sinusoid", "piecewise-random"):
            raise ValidationError(f"unknown field kind {self.kind!r}")
        if self.kind == "piecewise-random" and not self.segment > 0:
            raise ValidationError("piecewise-random segment must be positive")

    @classmethod
    def zero(cls):
        return cls("constant", 0.0)

    def _segment_value(self, j):
        rng = np.random.default_rng([self.seed, self.draw, j])
        return self.amplitude * (2.0 * rng.random() - 1.0)

    def __call__(self, t):
        if self.kind == "constant":
            return float(self.amplitude)
        if self.kind == "sinusoid":
            return float(self.amplitude * math.cos(2 * math.pi * self.frequency * t + self.phase))
        return float(self._segment_value(int(math.floor(t / self.segment))))

    def integral(self, t0, t1):
        """Exact integral of the field over ``[t0, t1]``."""
        if self.kind == "constant":
            return float(self.amplitude * (t1 - t0))
        if self.kind == "sinusoid":
            w = 2 * math.pi * self.frequency
            if w == 0:
                return float(self.amplitude * math.cos(self.phase) * (t1 - t0))
            return float(self.amplitude / w * (math.sin(w * t1 + self.phase) - math.sin(w * t0 + self.phase)))
        total = 0.0
        j = int(math.floor(t0 / self.segment))
        while j * self.segment < t1:
            lo, hi = max(t0, j * self.segment), min(t1, (j + 1) * self.segment)
            if hi > lo:
                total += self._segment_value(j) * (hi - lo)
            j += 1
        return float(total)

    def realization(self, index):
        if self.kind != "piecewise-random":
            return self
        return replace(self, draw=int(index))

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)


@dataclass(frozen=True)
class NoiseIntegrals:
    """Integrated fields ``eps_m`` over one Zeno interval."""

    epsilons: tuple

    @classmethod
    def from_fields(cls, fields, t0, t1):
        return cls(tuple(f.integral(t0, t1) for f in fields))

    def zeno_parameter(self, gens):
        if len(self.epsilons) == 0:
            return 0.0
        return float(np.max(np.abs(self.epsilons) * gens.spectral_norms()))

    def check_regime(self, gens, threshold=ZENO_REGIME_THRESHOLD):
        """Return True inside the Zeno regime; warn otherwise."""
        value = self.zeno_parameter(gens)
        if value >= threshold:
            warnings.warn(
                f"outside the Zeno regime: max |eps_m| ||E_m|| = {value:.3g} >= {threshold}",
                ZenoRegimeWarning,
                stacklevel=2,
            )
            return False
        return True


def _check_fields(gens, fields):
    if len(fields) != len(gens):
        raise ValidationError(f"{len(fields)} field profiles for {len(gens)} generators")


def n_substeps(t0, t1, dt):
    """Number of equal substeps of width at most ``dt`` covering ``[t0, t1]``."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if not t1 > t0:
        raise ValidationError("t1 must exceed t0")
    return max(1, math.ceil((t1 - t0) / dt - 1e-9))


def evolve_exact(psi, gens, fields, t0, t1, dt):
    """Propagate ``psi`` under ``sum_m f_m(t) E_m`` from ``t0`` to ``t1``.

    The interval is split into ``ceil((t1 - t0) / dt)`` equal substeps; on each
    the Hamiltonian is frozen at the substep midpoint and exponentiated
    exactly. The scheme is second order in the step width.
    """
    psi = as_state(psi)
    _check_fields(gens, fields)
    if psi.size != gens.dim:
        raise ValidationError(f"state dim {psi.size} != generator dim {gens.dim}")
    n = n_substeps(t0, t1, dt)
    h = (t1 - t0) / n
    if len(gens) == 0:
        return psi.copy()
    for j in range(n):
        tm = t0 + (j + 0.5) * h
        values = np.array([f(tm) for f in fields])
        if not values.any():
            continue
        psi = expm_hermitian(gens.hamiltonian(values), h) @ psi
    return psi


def evolve_first_order(psi, gens, eps):
    """Return ``(I - i sum_m eps_m E_m) psi`` (deliberately not renormalized)."""
    psi = as_state(psi)
    e = np.asarray(eps.epsilons if isinstance(eps, NoiseIntegrals) else eps, dtype=float)
    if e.shape != (len(gens),):
        raise ValidationError(f"expected {len(gens)} noise integrals, got {e.shape}")
    if len(gens) == 0:
        return psi.copy()
    return psi - 1j * (gens.hamiltonian(e) @ psi)


def _support_tuple(support):
    if isinstance(support, (set, frozenset)):
        return tuple(sorted(support))
    if isinstance(support, (int, np.integer)):
        return (int(support),)
    return tuple(int(q) for q in support)


def pauli_product(word):
    out = np.array([[1]], dtype=complex)
    for ch in word.upper():
        out = np.kron(out, PAULI[ch])
    return out


def few_body_generator(n_qubits, support, local_op):
    """Embed a one- or two-qubit Hermitian operator into ``n_qubits`` qubits.

    Qubit 0 is the most significant tensor factor. The tensor factors of
    ``local_op`` follow the order of ``support`` (sets are sorted first).
    """
    sup = _support_tuple(support)
    if len(sup) not in (1, 2):
        raise ValidationError("support must contain one or two qubits")
    if len(set(sup)) != len(sup):
        raise ValidationError(f"repeated qubit in support {sup}")
    for q in sup:
        if not 0 <= q < n_qubits:
            raise ValidationError(f"qubit index {q} out of range for {n_qubits} qubits")
    local = as_operator(local_op)
    if local.shape[0] != 2 ** len(sup):
        raise ValidationError(f"local operator must be {2 ** len(sup)}-dimensional")
    if float(np.max(np.abs(local - local.conj().T))) > TOL.hermitian:
        raise ValidationError("local operator is not Hermitian")

    rest = [q for q in range(n_qubits) if q not in sup]
    order = list(sup) + rest
    full = np.kron(local, np.eye(2 ** len(rest), dtype=complex))
    # axes of `full` are (out qubits in `order`, in qubits in `order`)
    tensor = full.reshape((2,) * (2 * n_qubits))
    inverse = np.argsort(order)
    axes = list(inverse) + [n_qubits + a for a in inverse]
    return tensor.transpose(axes).reshape(2**n_qubits, 2**n_qubits)


def two_body_family(n_qubits):
    """All one- and two-qubit Pauli products as ``(support, word)`` pairs."""
    terms = []
    for q in range(n_qubits):
        for p in "XYZ":
            terms.append(((q,), p))
    for i, j in combinations(range(n_qubits), 2):
        for p in "XYZ":
            for r in "XYZ":
                terms.append(((i, j), p + r))
    return terms
