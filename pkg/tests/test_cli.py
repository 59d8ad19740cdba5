import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from zenoprotect import cli, records
from zenoprotect.code_search import CodeSpace
from zenoprotect.error_model import PAULI, GeneratorSet

SIGMA_Z = [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]

CONFIGS = {
    "check-bound": {"problem": {"A": 4, "M": 3}},
    "find-code": {"seed": 2, "problem": {"I": 2, "A": 4, "M": 3}, "generators": {"kind": "random"}},
    "synthesize-timings": {"seed": 3, "problem": {"I": 1, "A": 4, "M": 1}, "generators": {"kind": "random"}},
    "simulate-zeno": {
        "seed": 5,
        "problem": {"I": 2, "A": 4, "M": 3},
        "generators": {"kind": "random"},
        "fields": [{"kind": "sinusoid", "amplitude": 1.0, "frequency": 0.2},
                   {"kind": "piecewise-random", "amplitude": 0.8, "segment": 0.05},
                   {"kind": "constant", "amplitude": 0.4}],
        "algorithm": {"tau_Z": 0.01, "n_cycles": 20, "dt": 0.005},
    },
    "sweep-tauZ": {
        "seed": 6,
        "problem": {"I": 2, "A": 4, "M": 3},
        "generators": {"kind": "random"},
        "fields": {"kind": "constant", "amplitude": 0.5},
        "algorithm": {"tauZ_list": [0.02, 0.002], "n_cycles": 2, "substeps": 2},
    },
    "random-coding-sweep": {"seed": 7, "problem": {"k": 1},
                            "algorithm": {"n_list": [3, 4], "n_seeds": 2, "tau_range": [0.5, 1.5]}},
    "lie-rank": {"seed": 8, "problem": {"N": 3}},
}


def _run(tmp_path, name, config, out="out", extra=()):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(config))
    status = cli.main([name, "--config", str(path), "--out", str(tmp_path / out), "--quiet", *extra])
    return status, tmp_path / out


def _bodies(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.name != "manifest.json"}


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_every_subcommand_is_deterministic(name, tmp_path):
    s1, d1 = _run(tmp_path, name, CONFIGS[name], "a")
    s2, d2 = _run(tmp_path, name, CONFIGS[name], "b")
    assert s1 == s2 == cli.EXIT_OK
    assert _bodies(d1) == _bodies(d2)
    m1 = json.loads((d1 / "manifest.json").read_text())
    m2 = json.loads((d2 / "manifest.json").read_text())
    assert m1["config_hash"] == m2["config_hash"]
    assert m1["outputs"] == sorted(_bodies(d1))
    assert m1["seed"] == CONFIGS[name].get("seed", 0)


def test_seed_flag_changes_outputs(tmp_path):
    _, a = _run(tmp_path, "find-code", CONFIGS["find-code"], "a")
    _, b = _run(tmp_path, "find-code", CONFIGS["find-code"], "b", ("--seed", "99"))
    assert _bodies(a)["code.txt"] != _bodies(b)["code.txt"]
    assert json.loads((b / "manifest.json").read_text())["seed"] == 99


def test_check_bound_prints_result(tmp_path, capsys):
    path = tmp_path / "cb.json"
    path.write_text(json.dumps(CONFIGS["check-bound"]))
    assert cli.main(["check-bound", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip() == "satisfied"
    path.write_text(json.dumps({"problem": {"A": 2, "M": 3}}))
    assert cli.main(["check-bound", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip() == "violated"


def test_find_code_sigma_z_file_reloads(tmp_path):
    cfg = {"problem": {"I": 1, "A": 2}, "generators": {"kind": "explicit", "matrices": [SIGMA_Z]}}
    status, out = _run(tmp_path, "find-code", cfg)
    assert status == 0
    code = records.load(out / "code.txt")
    assert isinstance(code, CodeSpace) and code.converged
    assert code.check(GeneratorSet([PAULI["Z"]]))
    a, b = code.codewords[0]
    assert abs(abs(a) ** 2 - abs(b) ** 2) < 1e-10


def test_simulate_zero_fields_fidelity_column(tmp_path):
    cfg = dict(CONFIGS["simulate-zeno"])
    cfg["fields"] = {"kind": "constant", "amplitude": 0.0}
    status, out = _run(tmp_path, "simulate-zeno", cfg)
    assert status == 0
    rows = list(csv.DictReader(line for line in (out / "trace.csv").read_text().splitlines()
                               if not line.startswith("#")))
    assert len(rows) == 20
    assert all(float(r["fidelity"]) == pytest.approx(1.0, abs=1e-14) for r in rows)


def test_replay_of_synthesized_timings(tmp_path):
    status, syn = _run(tmp_path, "synthesize-timings", CONFIGS["synthesize-timings"], "syn")
    assert status == 0
    cfg = dict(CONFIGS["synthesize-timings"])
    cfg["inputs"] = {"timings": str(syn / "synthesis.txt")}
    cfg["fields"] = {"kind": "constant", "amplitude": 0.5}
    cfg["algorithm"] = {"n_cycles": 10}
    status, out = _run(tmp_path, "simulate-zeno", cfg, "rep")
    assert status == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["decoding"] == "replay"
    assert summary["final_fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_exit_code_invalid_config(tmp_path, capsys):
    status, _ = _run(tmp_path, "find-code", {"problem": {"N": 6, "I": 2, "A": 4}})
    assert status == cli.EXIT_CONFIG
    assert "invalid input" in capsys.readouterr().err


def test_exit_code_truncated_input_file(tmp_path):
    status, out = _run(tmp_path, "find-code", CONFIGS["find-code"], "fc")
    text = (out / "code.txt").read_text().splitlines()
    (tmp_path / "cut.txt").write_text("\n".join(text[: len(text) // 2]) + "\n")
    cfg = dict(CONFIGS["simulate-zeno"], inputs={"code": "cut.txt"})
    status, _ = _run(tmp_path, "simulate-zeno", cfg, "sim")
    assert status == cli.EXIT_CONFIG


def test_exit_code_non_convergence(tmp_path):
    cfg = dict(CONFIGS["find-code"], algorithm={"max_iter": 2})
    status, out = _run(tmp_path, "find-code", cfg)
    assert status == cli.EXIT_NONCONVERGED
    assert json.loads((out / "manifest.json").read_text())["exit_status"] == 3
    assert not json.loads((out / "summary.json").read_text())["converged"]


def test_exit_code_runtime_failure(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise FloatingPointError("overflow")

    monkeypatch.setattr(cli, "lie_algebra_rank", boom)
    status, _ = _run(tmp_path, "lie-rank", CONFIGS["lie-rank"])
    assert status == cli.EXIT_RUNTIME
    assert "runtime failure" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    path = tmp_path / "cb.json"
    path.write_text(json.dumps(CONFIGS["check-bound"]))
    res = subprocess.run([sys.executable, "-m", "zenoprotect", "check-bound", "--config", str(path),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "satisfied"
    assert np.all([(tmp_path / "o" / f).exists() for f in ("bound.json", "manifest.json")])
