"""Command-line front end.

    zenoprotect <subcommand> --config PATH [--seed INT] [--out DIR] [--quiet]

Exit codes: 0 success, 2 invalid configuration, 3 non-convergence,
4 runtime failure.
"""
import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, records
from .code_search import CodingMatrix, CodeSpace, complete_coding_matrix, find_code, hamming_bound
from .config import ConfigError, load_config, parse_complex_matrix
from .control import (
    ControlPair,
    decode_by_sign_reversal,
    lie_algebra_rank,
    propagator,
    synthesize_timings,
)
from .core import ValidationError, random_state
from .error_model import FieldProfile, GeneratorSet
from .random_coding import default_control_pair, sparsity_audit, suppression_sweep
from .zeno import ProtectionSetup, ZenoConfig, run_protection, run_unprotected, scaling_vs_tauZ

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_RUNTIME = 0, 2, 3, 4
SUBCOMMANDS = ("check-bound", "find-code", "synthesize-timings", "simulate-zeno", "sweep-tauZ",
               "random-coding-sweep", "lie-rank")


class NonConvergence(RuntimeError):
    pass


class _Run:
    """Collects outputs so each path is written once, after the computation."""

    def __init__(self, cfg, out_dir, quiet):
        self.cfg, self.out_dir, self.quiet = cfg, Path(out_dir), quiet
        self.files = {}
        self.status = EXIT_OK

    def put(self, name, text):
        self.files[name] = text

    def say(self, msg):
        if not self.quiet:
            print(msg)

    def flush(self, subcommand):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (self.out_dir / name).write_text(text)
        manifest = {
            "subcommand": subcommand,
            "config_hash": self.cfg.config_hash(),
            "artifact_version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seed": self.cfg.seed,
            "outputs": sorted(self.files),
            "exit_status": self.status,
        }
        (self.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(header, rows, tag):
    buf = io.StringIO()
    buf.write(f"# zenoprotect {tag} v1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _require(cfg, key):
    value = cfg.problem.get(key)
    if value is None:
        raise ConfigError(f"problem.{key} is required for this subcommand")
    return value


def build_generators(cfg):
    spec = cfg.generators
    if spec is None:
        raise ConfigError("a generators section is required for this subcommand")
    kind = spec["kind"]
    if kind == "random":
        return GeneratorSet.random(_require(cfg, "N"), _require(cfg, "M"),
                                   seed=cfg.seed_for("generators"), scale=spec.get("scale", 1.0))
    if kind == "explicit":
        return GeneratorSet(parse_complex_matrix(spec["matrices"], "generators.matrices"),
                            labels=spec.get("labels"))
    if kind == "few-body":
        return GeneratorSet.few_body(_require(cfg, "n"), [(tuple(t[0]), t[1]) for t in spec["terms"]])
    gens = records.load(cfg.path(spec["path"]))
    if not isinstance(gens, GeneratorSet):
        raise ConfigError("generators.path does not hold a generator-set record")
    return gens


def build_fields(cfg, M):
    spec = cfg.fields
    if spec is None:
        return [FieldProfile.zero() for _ in range(M)]
    base = cfg.seed_for("fields")
    items = spec if isinstance(spec, list) else [spec] * M
    if len(items) != M:
        raise ConfigError(f"{len(items)} field profiles for {M} generators")
    out = []
    for m, f in enumerate(items):
        f = dict(f)
        f.setdefault("seed", base + m)
        out.append(FieldProfile(**f))
    return out


def build_control(cfg, dim):
    spec = cfg.control or {"kind": "random"}
    rev = spec.get("sign_reversible", True)
    if spec["kind"] == "random":
        c = ControlPair.random(dim, seed=cfg.seed_for("control"), scale=spec.get("scale", 1.0))
        return ControlPair(c.H_a, c.H_b, rev)
    if spec["kind"] == "two-local":
        c = default_control_pair(_require(cfg, "n"), seed=cfg.seed_for("control"))
        return ControlPair(c.H_a, c.H_b, rev)
    return ControlPair(parse_complex_matrix(spec["H_a"], "control.H_a"),
                       parse_complex_matrix(spec["H_b"], "control.H_b"), rev)


def build_initial_state(cfg, I, N):
    spec = cfg.initial_state or {"kind": "random"}
    if spec["kind"] == "random":
        info = random_state(I, np.random.default_rng(cfg.seed_for("initial_state")))
    else:
        info = parse_complex_matrix(spec["amplitudes"], "initial_state.amplitudes")
        if info.shape != (I,):
            raise ConfigError(f"initial_state needs {I} amplitudes")
        info = info / np.linalg.norm(info)
    psi = np.zeros(N, dtype=complex)
    psi[:I] = info
    return psi


def _coding_setup(cfg, run, gens):
    """Coding matrix and optional replay decoder for the simulation subcommands."""
    alg = cfg.algorithm
    I = _require(cfg, "I")
    if "timings" in cfg.inputs:
        rep = records.load(cfg.path(cfg.inputs["timings"]))
        if not hasattr(rep, "final_timings") or rep.control is None:
            raise ConfigError("inputs.timings must be a synthesis report with its control pair")
        enc = propagator(rep.control, rep.final_timings)
        dpair, dtau = decode_by_sign_reversal(rep.control, rep.final_timings)
        return CodingMatrix(enc, I), propagator(dpair, dtau), "replay"
    if "code" in cfg.inputs:
        rec = records.load(cfg.path(cfg.inputs["code"]))
        if isinstance(rec, CodingMatrix):
            return rec, None, "exact-inverse"
        if isinstance(rec, CodeSpace):
            return complete_coding_matrix(rec, seed=cfg.seed_for("completion")), None, "exact-inverse"
        raise ConfigError("inputs.code must be a code-space or coding-matrix record")
    code = find_code(gens, I, tol=alg["tol"], max_iter=alg["max_iter"], seed=cfg.seed_for("code"))
    if not code.converged:
        raise NonConvergence(f"code search did not converge (residual {code.residual:.3e})")
    run.put("code.txt", records.dumps(code))
    return complete_coding_matrix(code, seed=cfg.seed_for("completion")), None, "exact-inverse"


def cmd_check_bound(cfg, run):
    A = _require(cfg, "A")
    M = cfg.problem.get("M")
    if M is None:
        M = len(build_generators(cfg))
    ok = hamming_bound(A, M)
    run.put("bound.json", _json({"A": A, "M": M, "satisfied": ok}))
    run.say("satisfied" if ok else "violated")


def cmd_find_code(cfg, run):
    gens = build_generators(cfg)
    alg = cfg.algorithm
    code = find_code(gens, _require(cfg, "I"), tol=alg["tol"], max_iter=alg["max_iter"],
                     seed=cfg.seed_for("code"))
    run.put("code.txt", records.dumps(code))
    run.put("residuals.csv", _csv(("iteration", "residual"),
                                  [(j, float(r)) for j, r in enumerate(code.residual_history)],
                                  "code-search-residuals"))
    summary = {"converged": code.converged, "iterations": code.iterations,
               "residual": code.residual, "restarts": code.restarts}
    if code.converged:
        run.put("coding_matrix.txt", records.dumps(complete_coding_matrix(code, seed=cfg.seed_for("completion"))))
    run.put("summary.json", _json(summary))
    run.say(f"converged={code.converged} iterations={code.iterations} residual={code.residual:.3e}")
    if not code.converged:
        run.status = EXIT_NONCONVERGED


def cmd_synthesize(cfg, run):
    gens = build_generators(cfg)
    alg = cfg.algorithm
    ctrl = build_control(cfg, gens.dim)
    rep = synthesize_timings(ctrl, _require(cfg, "I"), gens, alg["tau_range"], tol=alg["synth_tol"],
                             max_iter=alg["synth_max_iter"], seed=cfg.seed_for("synthesis"),
                             delta_n=alg["delta_n"], alpha_grid=tuple(alg["alpha_grid"]))
    rank = lie_algebra_rank(ctrl, alg["lie_depth"], include_identity=alg["include_identity"])
    run.put("synthesis.txt", records.dumps(rep))
    run.put("G_history.csv", _csv(("iteration", "G", "accepted"),
                                  [(j, float(g), int(a)) for j, (g, a) in enumerate(zip(rep.G_history, rep.accepted))],
                                  "synthesis-G"))
    run.put("summary.json", _json({"converged": rep.converged, "G_final": rep.G_history[-1],
                                   "iterations": rep.iterations, "rotations": rep.rotations,
                                   "restarts": rep.restarts, "lie_rank": rank,
                                   "n_timings": rep.final_timings.n}))
    run.say(f"converged={rep.converged} G={min(rep.G_history):.3e} rotations={rep.rotations} lie_rank={rank}")
    if not rep.converged:
        run.status = EXIT_NONCONVERGED


def cmd_simulate(cfg, run):
    gens = build_generators(cfg)
    alg = cfg.algorithm
    fields = build_fields(cfg, len(gens))
    coding, decoder, mode = _coding_setup(cfg, run, gens)
    psi0 = build_initial_state(cfg, coding.code_dim, gens.dim)
    zc = ZenoConfig(alg["tau_Z"], alg["n_cycles"], alg["dt"], alg["projection_mode"],
                    alg["noise_mode"], cfg.seed_for("simulation"))
    rec = run_protection(psi0, coding, gens, fields, zc, decoder=decoder)
    plain = run_protection(psi0, CodingMatrix.identity(gens.dim, coding.code_dim), gens, fields, zc)
    times, free = run_unprotected(psi0, gens, fields, zc.tau_Z * zc.n_cycles, zc.dt, zc.tau_Z)
    run.put("trace.csv", rec.to_csv())
    run.put("plain_projection.csv", plain.to_csv())
    run.put("unprotected.csv", _csv(("cycle", "t", "fidelity"),
                                    [(j + 1, float(t), float(f)) for j, (t, f) in enumerate(zip(times, free))],
                                    "unprotected-trace"))
    summary = {"decoding": mode, "cycles": rec.n_cycles, "failed_cycle": rec.failed_cycle,
               "final_fidelity": rec.final_fidelity, "cumulative_survival": rec.cumulative_survival,
               "plain_projection_final_fidelity": plain.final_fidelity,
               "unprotected_final_fidelity": float(free[-1])}
    run.put("summary.json", _json(summary))
    run.say(f"protected fidelity={rec.final_fidelity:.12f} unprotected={free[-1]:.6f} "
            f"plain projection={plain.final_fidelity:.6f}")


def cmd_sweep_tauz(cfg, run):
    gens = build_generators(cfg)
    alg = cfg.algorithm
    fields = build_fields(cfg, len(gens))
    coding, _, _ = _coding_setup(cfg, run, gens)
    psi0 = build_initial_state(cfg, coding.code_dim, gens.dim)
    setup = ProtectionSetup(psi0, coding, gens, fields, substeps=alg["substeps"],
                            n_cycles=alg["n_cycles"], total_time=alg["total_time"])
    table = scaling_vs_tauZ(setup, alg["tauZ_list"])
    run.put("scaling.csv", table.to_csv())
    run.put("summary.json", _json({"slope": table.slope}))
    run.say(f"per-cycle infidelity slope = {table.slope}")


def cmd_random_coding(cfg, run):
    alg = cfg.algorithm
    k = cfg.problem.get("k", 1)
    res = suppression_sweep(alg["n_list"], k, seeds=alg["n_seeds"], switch_factor=alg["switch_factor"],
                            tau_range=tuple(alg["tau_range"]), normalization=alg["normalization"],
                            base_seed=cfg.seed_for("sweep"))
    run.put("sweep.csv", res.to_csv())
    summary = res.summary()
    summary["sparsity"] = sparsity_audit(alg["n_list"])
    run.put("summary.json", _json(summary))
    run.say(f"slopes={res.slopes}")


def cmd_lie_rank(cfg, run):
    dim = _require(cfg, "N")
    ctrl = build_control(cfg, dim)
    alg = cfg.algorithm
    rank = lie_algebra_rank(ctrl, alg["lie_depth"], include_identity=alg["include_identity"])
    run.put("lie_rank.json", _json({"N": dim, "rank": rank, "full": rank == dim * dim}))
    run.say(f"rank={rank} of {dim * dim}")


COMMANDS = {
    "check-bound": cmd_check_bound,
    "find-code": cmd_find_code,
    "synthesize-timings": cmd_synthesize,
    "simulate-zeno": cmd_simulate,
    "sweep-tauZ": cmd_sweep_tauz,
    "random-coding-sweep": cmd_random_coding,
    "lie-rank": cmd_lie_rank,
}


def make_parser():
    p = argparse.ArgumentParser(prog="zenoprotect", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--quiet", action="store_true")
    return p


def run_subcommand(name, cfg, out_dir, quiet=False):
    run = _Run(cfg, out_dir, quiet)
    COMMANDS[name](cfg, run)
    run.flush(name)
    return run.status


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        out = args.out or cfg.outputs.get("dir") or "out"
        return run_subcommand(args.subcommand, cfg, out, args.quiet)
    except (ConfigError, ValidationError, records.RecordParseError) as exc:
        print(f"zenoprotect: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"zenoprotect: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except Exception as exc:  # noqa: BLE001 - map anything else to the runtime code
        print(f"zenoprotect: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
