"""Acceptance suite: one test per criterion, each reporting a single pass/fail line.

The lines are also collected into the pytest terminal summary under
"acceptance criteria". Run just this file with ``pytest tests/test_acceptance.py -v``.
"""
import json
import time

import numpy as np
import pytest

from acceptance_log import report
from oracles import central_difference, expm_taylor, loglog_fit
from zenoprotect import cli
from zenoprotect.code_search import CodingMatrix, complete_coding_matrix, find_code
from zenoprotect.control import (
    ControlPair,
    decode_by_sign_reversal,
    lie_algebra_rank,
    propagator,
    propagator_derivatives,
    synthesize_timings,
)
from zenoprotect.core import expm_hermitian, random_hermitian, random_state
from zenoprotect.error_model import (
    FieldProfile,
    GeneratorSet,
    NoiseIntegrals,
    evolve_exact,
    evolve_first_order,
)
from zenoprotect.random_coding import sparsity_audit, suppression_sweep
from zenoprotect.zeno import (
    AncillaLayout,
    ProtectionSetup,
    ZenoConfig,
    effective_hamiltonian,
    run_protection,
    run_unprotected,
    scaling_vs_tauZ,
)

N, I, A, M = 8, 2, 4, 3
N_CODE_SEEDS = 50


def standard_fields():
    """Bounded (|f| <= 1) fields with distinct time dependence per generator."""
    return [
        FieldProfile("sinusoid", 1.0, 0.13, 0.0),
        FieldProfile("sinusoid", 0.8, 0.29, 1.0),
        FieldProfile("piecewise-random", 0.6, segment=0.1, seed=11),
    ]


@pytest.fixture(scope="module")
def code_corpus():
    """50 seeded (generators, code) pairs at N=8, I=2, M=3, with timing."""
    t0 = time.perf_counter()
    out = []
    for s in range(N_CODE_SEEDS):
        gens = GeneratorSet.random(N, M, seed=1000 + s)
        out.append((gens, find_code(gens, I, tol=1e-10, max_iter=10_000, seed=s)))
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def standard_fixture(code_corpus):
    gens, code = next((g, c) for g, c in code_corpus[0] if c.converged)
    coding = complete_coding_matrix(code, seed=0)
    psi0 = np.zeros(N, dtype=complex)
    # a superposition inside the information subspace, so in-subspace rotations are visible
    psi0[:I] = random_state(I, np.random.default_rng(3))
    return gens, coding, psi0


def test_c1_code_search_convergence(code_corpus):
    corpus, elapsed = code_corpus
    ok_runs = sum(c.converged and c.residual < 1e-8 and c.iterations <= 10_000 for _, c in corpus)
    frac = ok_runs / len(corpus)
    ok = frac >= 0.9 and elapsed < 60
    iters = [c.iterations for _, c in corpus if c.converged]
    assert report(1, "code-search convergence", ok,
                  f"{ok_runs}/{len(corpus)} seeds below 1e-8 (need >= 90%), median {int(np.median(iters))} "
                  f"iterations, {elapsed:.1f} s (limit 60 s)")


def test_c2_error_orthogonality(code_corpus):
    corpus, _ = code_corpus
    rng = np.random.default_rng(2)
    worst = 0.0
    n_codes = 0
    for gens, code in corpus:
        if not code.converged:
            continue
        n_codes += 1
        cm = complete_coding_matrix(code, seed=0).matrix
        for _ in range(10):
            chi = np.zeros(N, complex)
            psi = np.zeros(N, complex)
            chi[:I] = random_state(I, rng)
            psi[:I] = random_state(I, rng)
            for e in gens:
                worst = max(worst, abs(np.vdot(cm @ chi, e @ (cm @ psi))))
    ok = n_codes > 0 and worst < 1e-7
    assert report(2, "error orthogonality", ok,
                  f"max |<chi|C^dag E_m C|psi>| = {worst:.2e} over {n_codes} codes x 10 pairs (limit 1e-7)")


def test_c3_effective_hamiltonian_cancellation(code_corpus):
    corpus, _ = code_corpus
    rng = np.random.default_rng(3)
    layout = AncillaLayout(I, A)
    worst = 0.0
    for gens, code in corpus:
        if not code.converged:
            continue
        cm = complete_coding_matrix(code, seed=0)
        for _ in range(5):
            f = rng.uniform(-1, 1, M)
            h = effective_hamiltonian(cm, gens, layout, f)
            worst = max(worst, np.linalg.norm(h, 2) / np.sum(np.abs(f) * gens.spectral_norms()))
    ok = worst < 1e-8
    assert report(3, "effective-Hamiltonian cancellation", ok,
                  f"max ||h_e|| / sum|f_m| ||E_m|| = {worst:.2e} (limit 1e-8)")


def test_c4_zeno_quadratic_scaling(standard_fixture):
    gens, coding, psi0 = standard_fixture
    t0 = time.perf_counter()
    setup = ProtectionSetup(psi0, coding, gens, standard_fields(), substeps=8, total_time=0.3)
    table = scaling_vs_tauZ(setup, [0.03, 0.01, 0.003])
    elapsed = time.perf_counter() - t0
    ok = table.slope is not None and abs(table.slope - 2.0) <= 0.1 and elapsed < 30
    assert report(4, "Zeno quadratic scaling", ok,
                  f"slope {table.slope:.3f} over tau_Z 0.003..0.03 (need 2.0 +- 0.1), {elapsed:.1f} s (limit 30 s)")


def test_c5_protection_contrast(standard_fixture):
    gens, coding, psi0 = standard_fixture
    cfg = ZenoConfig(0.01, n_cycles=100, dt=0.0025)
    prot = run_protection(psi0, coding, gens, standard_fields(), cfg)
    plain = run_protection(psi0, CodingMatrix.identity(N, I), gens, standard_fields(), cfg)
    _, free = run_unprotected(psi0, gens, standard_fields(), cfg.tau_Z * cfg.n_cycles, cfg.dt)
    inf_prot = 1 - prot.final_fidelity
    inf_free = 1 - free[-1]
    inf_plain = 1 - plain.final_fidelity
    contrast = inf_free / max(inf_prot, 1e-300)
    # plain projection keeps the state in the subspace but not the state itself
    plain_fails = inf_plain > 1e-2 and inf_plain > 10 * inf_prot
    ok = contrast >= 10 and plain_fails
    assert report(5, "protection contrast", ok,
                  f"infidelity protected {inf_prot:.2e}, unprotected {inf_free:.2e} (ratio {contrast:.0f}, need >= 10), "
                  f"plain projection {inf_plain:.2e}")


def test_c6_timing_synthesis():
    converged = rotations = 0
    ranks = []
    for s in range(30):
        rng = np.random.default_rng([11, s])
        gens = GeneratorSet.random(4, 1, rng=rng)
        ctrl = ControlPair.random(4, rng=rng)
        ranks.append(lie_algebra_rank(ctrl))
        rep = synthesize_timings(ctrl, 1, gens, (0.1, 2.0), tol=1e-6, max_iter=500,
                                 seed=int(rng.integers(2**31)))
        converged += rep.converged and min(rep.G_history) < 1e-6 and rep.iterations <= 500
        rotations += rep.rotations
    full_rank = all(r == 16 for r in ranks)
    ok = converged >= 21 and rotations >= 1 and full_rank
    assert report(6, "timing synthesis", ok,
                  f"{converged}/30 seeds reach G < 1e-6 (need >= 70%), {rotations} rotation events, "
                  f"Lie rank 16 for {sum(r == 16 for r in ranks)}/30 pairs")


def test_c7_sign_reversal_decoding():
    rng = np.random.default_rng(7)
    worst = 0.0
    for j in range(20):
        ctrl = ControlPair.random(N, rng=rng)
        taus = rng.uniform(0.1, 2.0, 3 + j)
        pair, rev = decode_by_sign_reversal(ctrl, taus)
        worst = max(worst, np.max(np.abs(propagator(pair, rev) @ propagator(ctrl, taus) - np.eye(N))))
    ok = worst < 1e-9
    assert report(7, "sign-reversal decoding", ok, f"max |U_dec U_enc - I| = {worst:.2e} over 20 sequences (limit 1e-9)")


def test_c8_random_coding_suppression():
    t0 = time.perf_counter()
    res = suppression_sweep([4, 5, 6, 7, 8], k=1, seeds=10, switch_factor=8, base_seed=0)
    audit = sparsity_audit([4, 5, 6, 7, 8])
    elapsed = time.perf_counter() - t0
    haar, nh = res.slopes["haar"], res.slopes["nonholonomic"]
    ok = (abs(haar + 1.0) <= 0.3 and abs(nh - haar) <= 0.3 and abs(audit["exponent"] - 2.0) <= 0.2
          and elapsed < 300)
    assert report(8, "random-coding suppression", ok,
                  f"slope Haar {haar:.3f} (need -1.0 +- 0.3), non-holonomic {nh:.3f} (within 0.3), "
                  f"sparsity exponent {audit['exponent']:.3f} (need 2.0 +- 0.2), {elapsed:.1f} s (limit 300 s); "
                  f"unit-operator-norm slopes {res.operator_norm_slopes['haar']:.3f} / "
                  f"{res.operator_norm_slopes['nonholonomic']:.3f}")


def test_c9_oracle_equivalences():
    rng = np.random.default_rng(9)
    expm_err = max(np.max(np.abs(expm_hermitian(h, 0.3) - expm_taylor(-1j * h * 0.3)))
                   for h in (random_hermitian(d, rng) for d in (2, 4, 8, 16)))
    deriv_err = 0.0
    for n in (1, 4, 9):
        ctrl = ControlPair.random(4, rng=rng)
        taus = rng.uniform(0.1, 2.0, n)
        fd = central_difference(lambda t: propagator(ctrl, t), taus, h=1e-5)
        deriv_err = max(deriv_err, np.max(np.abs(propagator_derivatives(ctrl, taus) - fd)))
    gens = GeneratorSet.random(8, 3, rng=rng)
    psi = random_state(8, rng)
    d = rng.uniform(-1, 1, 3)
    epss = [1e-2, 1e-3, 1e-4]
    res = []
    for eps in epss:
        fields = [FieldProfile("constant", x * eps) for x in d]
        exact = evolve_exact(psi, gens, fields, 0.0, 1.0, 1.0)
        res.append(np.linalg.norm(exact - evolve_first_order(psi, gens, NoiseIntegrals.from_fields(fields, 0, 1))))
    slope = loglog_fit(epss, res)
    ok = expm_err < 1e-10 and deriv_err < 1e-6 and abs(slope - 2.0) <= 0.1
    assert report(9, "oracle equivalences", ok,
                  f"expm vs series {expm_err:.1e} (< 1e-10), derivatives vs central differences {deriv_err:.1e} "
                  f"(< 1e-6), first-order residual slope {slope:.3f} (2.0 +- 0.1)")


DETERMINISM_CONFIGS = {
    "check-bound": {"problem": {"A": 4, "M": 3}},
    "find-code": {"seed": 1, "problem": {"I": 2, "A": 4, "M": 3}, "generators": {"kind": "random"}},
    "synthesize-timings": {"seed": 2, "problem": {"I": 1, "A": 4, "M": 1}, "generators": {"kind": "random"}},
    "simulate-zeno": {
        "seed": 3,
        "problem": {"I": 2, "A": 4, "M": 3},
        "generators": {"kind": "random"},
        "fields": [{"kind": "sinusoid", "amplitude": 1.0, "frequency": 0.13},
                   {"kind": "sinusoid", "amplitude": 0.8, "frequency": 0.29, "phase": 1.0},
                   {"kind": "piecewise-random", "amplitude": 0.6, "segment": 0.1}],
        "algorithm": {"projection_mode": "stochastic", "n_cycles": 50},
    },
    "sweep-tauZ": {"seed": 4, "problem": {"I": 2, "A": 4, "M": 3}, "generators": {"kind": "random"},
                   "fields": [{"kind": "constant", "amplitude": 0.5}, {"kind": "constant", "amplitude": -0.3},
                              {"kind": "sinusoid", "amplitude": 0.4, "frequency": 1.0}],
                   "algorithm": {"n_cycles": 3}},
    "random-coding-sweep": {"seed": 5, "problem": {"k": 1},
                            "algorithm": {"n_list": [3, 4, 5], "n_seeds": 2, "tau_range": [0.5, 1.5]}},
    "lie-rank": {"seed": 6, "problem": {"N": 4}},
}


def test_c10_determinism(tmp_path):
    identical = []
    n_files = 0
    for name, raw in DETERMINISM_CONFIGS.items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps(raw))
        bodies = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            status = cli.main([name, "--config", str(cfg), "--out", str(out), "--quiet"])
            assert status == 0, f"{name} exited {status}"
            bodies.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"})
        n_files += len(bodies[0])
        identical.append(bodies[0] == bodies[1])
    ok = all(identical)
    assert report(10, "determinism", ok,
                  f"{sum(identical)}/{len(identical)} subcommands byte-identical across re-runs ({n_files} output files)")
