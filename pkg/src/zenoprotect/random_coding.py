"""Suppression of projected error elements by generic coding unitaries.

Qubit 0 is the most significant factor. The first ``n - k`` qubits are the
ancilla and the last ``k`` carry data, so with every ancilla qubit in
``|0>`` the data subspace is spanned by the first ``2**k`` coordinate
vectors.
"""
import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .control import ControlPair, propagator
from .core import ValidationError, haar_random_unitary
from .error_model import GeneratorSet, few_body_generator, pauli_product, two_body_family

DEFAULT_SWITCH_FACTOR = 8
DEFAULT_TAU_RANGE = (0.5, 1.5)
MAX_QUBITS = 10
SWEEP_COLUMNS = ("n", "k", "source", "switch_count", "seed", "mean_abs", "max_abs", "predicted")


@dataclass(eq=False)
class QubitSystem:
    n: int
    k: int
    generators: GeneratorSet

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ValidationError("need 1 <= k < n")
        if self.generators.dim != 2**self.n:
            raise ValidationError("generators must act on 2**n dimensions")

    @property
    def ancilla_qubits(self):
        return tuple(range(self.n - self.k))

    @property
    def data_qubits(self):
        return tuple(range(self.n - self.k, self.n))


@dataclass(frozen=True)
class SuppressionRecord:
    n: int
    k: int
    coding_source: str
    switch_count: int
    mean_abs: float
    max_abs: float
    predicted: float
    seed: int = 0

    def row(self):
        return [self.n, self.k, self.coding_source, self.switch_count, self.seed,
                format(self.mean_abs, ".17g"), format(self.max_abs, ".17g"),
                format(self.predicted, ".17g")]


def _random_two_local(n, rng):
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        for p in "XYZ":
            h += rng.standard_normal() * few_body_generator(n, (q,), pauli_product(p))
    for q in range(n - 1):
        for word in (a + b for a in "XYZ" for b in "XYZ"):
            h += rng.standard_normal() * few_body_generator(n, (q, q + 1), pauli_product(word))
    return h


def default_control_pair(n, seed=None, rng=None):
    """Two random 2-local Hamiltonians on a chain of ``n`` qubits.

    Each is a sum of all single-qubit Paulis and all nearest-neighbour Pauli
    products with independent standard-normal coefficients.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    return ControlPair(_random_two_local(n, rng), _random_two_local(n, rng), sign_reversible=True)


def random_nonholonomic_unitary(ctrl, switch_count, tau_range=DEFAULT_TAU_RANGE, seed=None, rng=None):
    """Propagator of ``switch_count`` pulses with uniform random timings."""
    if switch_count < 1:
        raise ValidationError("switch_count must be >= 1")
    rng = np.random.default_rng(seed) if rng is None else rng
    taus = rng.uniform(tau_range[0], tau_range[1], switch_count)
    return propagator(ctrl, taus)


def haar_moment_ratios(u):
    """``(N E|U_ij|^2, N(N+1)/2 E|U_ij|^4)``; both equal 1 for Haar unitaries."""
    n = u.shape[0]
    a2 = np.abs(u) ** 2
    return float(n * a2.mean()), float(n * (n + 1) / 2 * (a2**2).mean())


def genericity_proxy(u):
    return haar_moment_ratios(u)[1]


def projected_error_norm(C, E, k, n, remove_trace=False):
    """Mean and max entry magnitude of ``P C^dag E C P`` on the data block.

    With ``remove_trace`` the block's trace part is subtracted first, which
    removes the identity contribution carried by generators with non-zero
    trace.
    """
    C = np.asarray(C, dtype=complex)
    E = np.asarray(E, dtype=complex)
    dim = 2**n
    if C.shape != (dim, dim) or E.shape != (dim, dim):
        raise ValidationError(f"operators must be {dim} x {dim}")
    if not 1 <= k <= n:
        raise ValidationError("need 1 <= k <= n")
    cols = C[:, :2**k]
    block = cols.conj().T @ E @ cols
    if remove_trace:
        block = block - np.trace(block) / block.shape[0] * np.eye(block.shape[0])
    mags = np.abs(block)
    return float(mags.mean()), float(mags.max())


def default_error_generator(n):
    """XX coupling between the first ancilla qubit and the last data qubit."""
    return few_body_generator(n, (0, n - 1), pauli_product("XX"))


def _normalized(E, normalization):
    if normalization == "hilbert-schmidt":
        return E / np.linalg.norm(E)
    if normalization == "operator":
        return E / np.linalg.norm(E, 2)
    raise ValidationError(f"unknown normalization {normalization!r}")


@dataclass
class SweepResult:
    records: list
    slopes: dict
    operator_norm_slopes: dict
    normalization: str
    truncated: tuple = ()

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# zenoprotect suppression-sweep v1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in self.records:
            w.writerow(r.row())
        return buf.getvalue()

    def summary(self):
        return {
            "normalization": self.normalization,
            "slopes": self.slopes,
            "operator_norm_slopes": self.operator_norm_slopes,
            "truncated": list(self.truncated),
        }


def _fit(ns, k, values):
    x = np.array([n - k for n in ns], dtype=float)
    y = np.log2(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def suppression_sweep(n_list, k=1, ctrl_family=default_control_pair, seeds=10,
                      switch_factor=DEFAULT_SWITCH_FACTOR, tau_range=DEFAULT_TAU_RANGE,
                      error_generator=default_error_generator, normalization="hilbert-schmidt",
                      sources=("haar", "nonholonomic"), base_seed=0, max_n=MAX_QUBITS):
    """Projected error magnitudes for Haar and non-holonomic coding versus ``n``.

    Returns a :class:`SweepResult` with one record per ``(n, seed, source)``
    and, per source, the least-squares slope of ``log2(mean_abs)`` against the
    ancilla size ``n - k`` (seed-averaged magnitudes). The error generator is
    rescaled per ``normalization``; ``operator_norm_slopes`` repeats the fit
    for unit spectral norm.
    """
    ns = [int(n) for n in n_list]
    if ns != sorted(ns):
        raise ValidationError("n_list must be ascending")
    kept = [n for n in ns if n <= max_n]
    truncated = tuple(n for n in ns if n > max_n)
    if truncated:
        warnings.warn(f"n > {max_n} exceeds the dense budget; dropped {truncated}", stacklevel=2)
    if any(n <= k for n in kept):
        raise ValidationError("every n must exceed k")
    records = []
    means = {s: [] for s in sources}
    op_means = {s: [] for s in sources}
    for n in kept:
        E_raw = error_generator(n)
        E = _normalized(E_raw, normalization)
        to_op = np.linalg.norm(E_raw, 2) / np.linalg.norm(E_raw) if normalization == "hilbert-schmidt" else 1.0
        predicted = 2.0 ** (k - n)
        per = {s: [] for s in sources}
        for seed in range(seeds):
            for si, source in enumerate(sources):
                rng = np.random.default_rng([base_seed, n, seed, si])
                if source == "haar":
                    C, switches = haar_random_unitary(2**n, rng=rng), 0
                elif source == "nonholonomic":
                    switches = switch_factor * n
                    C = random_nonholonomic_unitary(ctrl_family(n, rng=rng), switches, tau_range, rng=rng)
                else:
                    raise ValidationError(f"unknown coding source {source!r}")
                mean_abs, max_abs = projected_error_norm(C, E, k, n)
                records.append(SuppressionRecord(n, k, source, switches, mean_abs, max_abs, predicted, seed))
                per[source].append(mean_abs)
        for s in sources:
            means[s].append(np.mean(per[s]))
            op_means[s].append(np.mean(per[s]) / to_op)
    slopes = {s: _fit(kept, k, means[s]) for s in sources} if len(kept) > 1 else {}
    op_slopes = {s: _fit(kept, k, op_means[s]) for s in sources} if len(kept) > 1 else {}
    return SweepResult(records, slopes, op_slopes, normalization, truncated)


def sparsity_audit(n_list, row_nonzeros=True):
    """Size of the one- plus two-qubit Pauli family and its power-law exponent in ``n``.

    With ``row_nonzeros`` the audit also builds the sum of the whole family
    (Gaussian coefficients, fixed seed per n) and reports the largest number of
    non-zero entries in a row, a diagnostic that is not fitted against n**2.
    """
    ns = np.asarray(n_list, dtype=float)
    counts = [len(two_body_family(int(n))) for n in ns]
    exponent = float(np.polyfit(np.log(ns), np.log(counts), 1)[0]) if len(ns) > 1 else None
    out = {"n": [int(n) for n in ns], "generator_count": counts, "exponent": exponent}
    if row_nonzeros:
        rows = []
        for n in ns.astype(int):
            rng = np.random.default_rng([int(n), 17])
            h = sum(rng.standard_normal() * few_body_generator(int(n), sup, pauli_product(w))
                    for sup, w in two_body_family(int(n)))
            rows.append(int(np.max(np.sum(np.abs(h) > 1e-12, axis=1))))
        out["row_nonzeros"] = rows
        out["row_exponent"] = float(np.polyfit(np.log(ns), np.log(rows), 1)[0]) if len(ns) > 1 else None
    return out
