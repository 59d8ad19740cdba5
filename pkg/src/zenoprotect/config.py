"""Experiment configuration: JSON ingestion, validation and seed fan-out.

A config is a JSON object with the sections below; every section and key is
optional unless a subcommand needs it, and unknown keys are rejected.

problem      N, I, A, M (dense problems) or n, k (qubit problems)
generators   {"kind": "random", "scale": 1.0}
             {"kind": "explicit", "matrices": [M x N x N of [re, im]], "labels": [...]}
             {"kind": "few-body", "terms": [[[q0, q1], "ZZ"], ...]}
             {"kind": "file", "path": "gens.txt"}   (a generator-set record)
fields       one profile object (broadcast to every generator) or a list of M
control      {"kind": "random", "scale": 1.0, "sign_reversible": true}
             {"kind": "two-local"}                   (needs problem.n)
             {"kind": "explicit", "H_a": [...], "H_b": [...]}
algorithm    see ALGORITHM_DEFAULTS
initial_state {"kind": "random"} or {"kind": "explicit", "amplitudes": [[re, im], ...]}
inputs       {"code": path, "timings": path}
outputs      {"dir": path}
seed         integer root seed

All randomness is drawn from per-purpose seeds derived from the root seed by
:func:`derive_seed`, which hashes ``(root, STREAMS[purpose])`` through
``numpy.random.SeedSequence``.
"""
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ValidationError

STREAMS = {
    "generators": 0,
    "fields": 1,
    "code": 2,
    "completion": 3,
    "control": 4,
    "synthesis": 5,
    "simulation": 6,
    "initial_state": 7,
    "sweep": 8,
}

TOP_KEYS = {"version", "seed", "problem", "generators", "fields", "control", "algorithm",
            "initial_state", "inputs", "outputs"}
PROBLEM_KEYS = {"N", "I", "A", "M", "n", "k"}
GENERATOR_KEYS = {
    "random": {"kind", "scale"},
    "explicit": {"kind", "matrices", "labels"},
    "few-body": {"kind", "terms"},
    "file": {"kind", "path"},
}
FIELD_KEYS = {"kind", "amplitude", "frequency", "phase", "segment", "seed"}
CONTROL_KEYS = {
    "random": {"kind", "scale", "sign_reversible"},
    "two-local": {"kind", "sign_reversible"},
    "explicit": {"kind", "H_a", "H_b", "sign_reversible"},
}
STATE_KEYS = {"random": {"kind"}, "explicit": {"kind", "amplitudes"}}
INPUT_KEYS = {"code", "timings"}
OUTPUT_KEYS = {"dir"}

ALGORITHM_DEFAULTS = {
    "tol": 1e-10,
    "max_iter": 10_000,
    "delta_n": 2,
    "alpha_grid": [2.0 ** -j for j in range(11)],
    "tau_range": [0.1, 2.0],
    "tau_Z": 0.01,
    "n_cycles": 100,
    "dt": 0.0025,
    "projection_mode": "deterministic",
    "noise_mode": "continuous",
    "synth_tol": 1e-6,
    "synth_max_iter": 500,
    "lie_depth": 12,
    "include_identity": False,
    "tauZ_list": [0.03, 0.01, 0.003],
    "substeps": 8,
    "total_time": None,
    "n_list": [4, 5, 6, 7, 8],
    "switch_factor": 8,
    "n_seeds": 10,
    "normalization": "hilbert-schmidt",
}


class ConfigError(ValidationError):
    pass


def derive_seed(root, purpose):
    idx = STREAMS[purpose]
    return int(np.random.SeedSequence([int(root), idx]).generate_state(1, dtype=np.uint32)[0])


def _check_keys(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def parse_complex_matrix(data, where):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: entries must be [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ConfigError(f"{where}: entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass
class ExperimentConfig:
    raw: dict
    seed: int = 0
    problem: dict = field(default_factory=dict)
    generators: dict = None
    fields: object = None
    control: dict = None
    algorithm: dict = field(default_factory=dict)
    initial_state: dict = None
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @property
    def N(self):
        return self.problem.get("N")

    @property
    def I(self):
        return self.problem.get("I")

    def seed_for(self, purpose):
        return derive_seed(self.seed, purpose)

    def config_hash(self):
        payload = dict(self.raw, seed=self.seed)
        payload.pop("outputs", None)
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def path(self, rel):
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p


def _int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where} must be >= {minimum}")
    return value


def validate(raw, base_dir=".", seed_override=None):
    """Check ``raw`` (a parsed JSON object) and return an :class:`ExperimentConfig`."""
    _check_keys(raw, TOP_KEYS, "config")
    base = Path(base_dir)
    cfg = ExperimentConfig(raw=raw, base_dir=base)
    cfg.seed = _int(raw.get("seed", 0), "seed") if seed_override is None else int(seed_override)

    prob = dict(raw.get("problem", {}))
    _check_keys(prob, PROBLEM_KEYS, "problem")
    for key in ("N", "I", "A"):
        if key in prob:
            _int(prob[key], f"problem.{key}", 1)
    if "M" in prob:
        _int(prob["M"], "problem.M", 0)
    if "n" in prob:
        _int(prob["n"], "problem.n", 1)
        prob.setdefault("N", 2 ** prob["n"])
        if prob["N"] != 2 ** prob["n"]:
            raise ConfigError("problem.N must equal 2**n")
    if "k" in prob:
        _int(prob["k"], "problem.k", 1)
        if "n" in prob and not prob["k"] < prob["n"]:
            raise ConfigError("problem.k must be smaller than problem.n")
        prob.setdefault("I", 2 ** prob["k"])
    if "I" in prob and "A" in prob:
        if "N" in prob and prob["N"] != prob["I"] * prob["A"]:
            raise ConfigError(f"N = {prob['N']} is not I * A = {prob['I'] * prob['A']}")
        prob.setdefault("N", prob["I"] * prob["A"])
    if "I" in prob and "N" in prob:
        if prob["I"] > prob["N"]:
            raise ConfigError("problem.I exceeds problem.N")
        prob.setdefault("A", prob["N"] // prob["I"])
    cfg.problem = prob

    gens = raw.get("generators")
    if gens is not None:
        kind = gens.get("kind") if isinstance(gens, dict) else None
        if kind not in GENERATOR_KEYS:
            raise ConfigError(f"generators.kind must be one of {sorted(GENERATOR_KEYS)}")
        _check_keys(gens, GENERATOR_KEYS[kind], "generators")
        if kind == "random":
            if "M" not in prob or "N" not in prob:
                raise ConfigError("random generators need problem.N and problem.M")
            if prob["M"] == 0:
                raise ConfigError("generator set is empty (problem.M = 0)")
        elif kind == "explicit":
            mats = gens.get("matrices")
            if not mats:
                raise ConfigError("generator set is empty")
            arr = parse_complex_matrix(mats, "generators.matrices")
            if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
                raise ConfigError("generators.matrices must be M square matrices")
            prob.setdefault("M", arr.shape[0])
            prob.setdefault("N", arr.shape[1])
            if prob["M"] != arr.shape[0] or prob["N"] != arr.shape[1]:
                raise ConfigError("explicit generators disagree with problem.M / problem.N")
        elif kind == "few-body":
            if not gens.get("terms"):
                raise ConfigError("generator set is empty")
            if "n" not in prob:
                raise ConfigError("few-body generators need problem.n")
            prob.setdefault("M", len(gens["terms"]))
            if prob["M"] != len(gens["terms"]):
                raise ConfigError("few-body terms disagree with problem.M")
        elif kind == "file":
            if not cfg.path(gens.get("path", "")).is_file():
                raise ConfigError(f"generator file {gens.get('path')!r} does not exist")
    cfg.generators = gens

    fields = raw.get("fields")
    if fields is not None:
        items = fields if isinstance(fields, list) else [fields]
        for j, f in enumerate(items):
            _check_keys(f, FIELD_KEYS, f"fields[{j}]")
        if isinstance(fields, list) and "M" in prob and len(fields) != prob["M"]:
            raise ConfigError(f"{len(fields)} field profiles for M = {prob['M']} generators")
    cfg.fields = fields

    ctrl = raw.get("control")
    if ctrl is not None:
        kind = ctrl.get("kind") if isinstance(ctrl, dict) else None
        if kind not in CONTROL_KEYS:
            raise ConfigError(f"control.kind must be one of {sorted(CONTROL_KEYS)}")
        _check_keys(ctrl, CONTROL_KEYS[kind], "control")
        if kind == "two-local" and "n" not in prob:
            raise ConfigError("two-local control needs problem.n")
    cfg.control = ctrl

    alg = dict(ALGORITHM_DEFAULTS)
    user_alg = raw.get("algorithm", {})
    _check_keys(user_alg, ALGORITHM_DEFAULTS, "algorithm")
    alg.update(user_alg)
    for key in ("tol", "tau_Z", "dt", "synth_tol"):
        if not (isinstance(alg[key], (int, float)) and alg[key] > 0):
            raise ConfigError(f"algorithm.{key} must be positive")
    if alg["dt"] > alg["tau_Z"]:
        raise ConfigError(f"algorithm.dt = {alg['dt']} exceeds tau_Z = {alg['tau_Z']}")
    for key in ("max_iter", "n_cycles", "synth_max_iter", "lie_depth", "substeps", "n_seeds",
                "switch_factor"):
        _int(alg[key], f"algorithm.{key}", 1)
    _int(alg["delta_n"], "algorithm.delta_n", 1)
    lo, hi = alg["tau_range"]
    if not 0 <= lo < hi:
        raise ConfigError("algorithm.tau_range must satisfy 0 <= lo < hi")
    cfg.algorithm = alg

    state = raw.get("initial_state")
    if state is not None:
        kind = state.get("kind") if isinstance(state, dict) else None
        if kind not in STATE_KEYS:
            raise ConfigError(f"initial_state.kind must be one of {sorted(STATE_KEYS)}")
        _check_keys(state, STATE_KEYS[kind], "initial_state")
    cfg.initial_state = state

    inputs = raw.get("inputs", {})
    _check_keys(inputs, INPUT_KEYS, "inputs")
    for key, rel in inputs.items():
        if not cfg.path(rel).is_file():
            raise ConfigError(f"inputs.{key} file {rel!r} does not exist")
    cfg.inputs = inputs

    outputs = raw.get("outputs", {})
    _check_keys(outputs, OUTPUT_KEYS, "outputs")
    cfg.outputs = outputs
    return cfg


def load_config(path, seed_override=None):
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate(raw, base_dir=p.parent, seed_override=seed_override)
