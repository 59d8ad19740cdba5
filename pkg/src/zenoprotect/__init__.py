"""Zeno-style protection of a quantum subspace against field-driven errors.

Code spaces orthogonal to a set of error generators, non-holonomic control
sequences that realize the coding unitary, simulation of the repeated
encode / evolve / decode / project cycle, and random-coding suppression
sweeps for qubit registers.
"""
__version__ = "0.1.0"

from .code_search import (
    CodeSpace,
    CodingMatrix,
    RestartRequired,
    complete_coding_matrix,
    constraint_residual,
    find_code,
    hamming_bound,
)
from .control import (
    ControlPair,
    DegenerateConfiguration,
    SynthesisReport,
    TimingVector,
    decode_by_sign_reversal,
    lie_algebra_rank,
    propagator,
    propagator_derivatives,
    synthesize_timings,
)
from .core import ValidationError, expm_hermitian, haar_random_unitary
from .error_model import FieldProfile, GeneratorSet, evolve_exact, evolve_first_order
from .random_coding import projected_error_norm, suppression_sweep
from .zeno import AncillaLayout, ZenoConfig, effective_hamiltonian, run_protection, run_unprotected

__all__ = [
    "AncillaLayout", "CodeSpace", "CodingMatrix", "ControlPair", "DegenerateConfiguration",
    "FieldProfile", "GeneratorSet", "RestartRequired", "SynthesisReport", "TimingVector",
    "ValidationError", "ZenoConfig", "complete_coding_matrix", "constraint_residual",
    "decode_by_sign_reversal", "effective_hamiltonian", "evolve_exact", "evolve_first_order",
    "expm_hermitian", "find_code", "haar_random_unitary", "hamming_bound", "lie_algebra_rank",
    "projected_error_norm", "propagator", "propagator_derivatives", "run_protection",
    "run_unprotected", "suppression_sweep", "synthesize_timings",
]
