import json

import pytest

from zenoprotect.config import STREAMS, ConfigError, derive_seed, load_config, validate

BASE = {
    "seed": 4,
    "problem": {"I": 2, "A": 4, "M": 3},
    "generators": {"kind": "random"},
}

# each fixture breaks exactly one consistency rule
INVALID = {
    "N != I*A": {"problem": {"N": 6, "I": 2, "A": 4, "M": 1}, "generators": {"kind": "random"}},
    "negative M": {"problem": {"I": 2, "A": 4, "M": -1}},
    "dt > tau_Z": {**BASE, "algorithm": {"tau_Z": 0.01, "dt": 0.02}},
    "empty random set": {"problem": {"I": 2, "A": 4, "M": 0}, "generators": {"kind": "random"}},
    "empty explicit set": {"problem": {"I": 1, "A": 2}, "generators": {"kind": "explicit", "matrices": []}},
    "empty few-body set": {"problem": {"n": 2, "k": 1}, "generators": {"kind": "few-body", "terms": []}},
    "unknown top key": {**BASE, "colour": "blue"},
    "unknown algorithm key": {**BASE, "algorithm": {"tolerance": 1e-3}},
    "unknown generator key": {**BASE, "generators": {"kind": "random", "sigma": 2}},
    "bad generator kind": {**BASE, "generators": {"kind": "magic"}},
    "missing input file": {**BASE, "inputs": {"code": "no_such_file.txt"}},
    "missing generator file": {"generators": {"kind": "file", "path": "absent.txt"}},
    "non-integer N": {"problem": {"N": 2.5}},
    "k >= n": {"problem": {"n": 2, "k": 2}},
    "field count mismatch": {**BASE, "fields": [{"kind": "constant"}]},
    "bad tau range": {**BASE, "algorithm": {"tau_range": [2.0, 1.0]}},
    "non-positive tol": {**BASE, "algorithm": {"tol": 0}},
}


@pytest.mark.parametrize("name", sorted(INVALID))
def test_validation_corpus_rejected(name, tmp_path):
    with pytest.raises(ConfigError):
        validate(INVALID[name], base_dir=tmp_path)


def test_valid_config_fills_derived_sizes(tmp_path):
    cfg = validate(BASE, base_dir=tmp_path)
    assert cfg.problem["N"] == 8 and cfg.seed == 4
    assert cfg.algorithm["tol"] == 1e-10
    q = validate({"problem": {"n": 4, "k": 1}}, base_dir=tmp_path)
    assert q.problem["N"] == 16 and q.problem["I"] == 2 and q.problem["A"] == 8


def test_seed_fanout_is_stable_and_distinct():
    seeds = {p: derive_seed(4, p) for p in STREAMS}
    assert len(set(seeds.values())) == len(STREAMS)
    assert seeds == {p: derive_seed(4, p) for p in STREAMS}
    assert derive_seed(5, "code") != seeds["code"]


def test_config_hash(tmp_path):
    a = validate(BASE, base_dir=tmp_path)
    b = validate(json.loads(json.dumps(BASE)), base_dir=tmp_path)
    assert a.config_hash() == b.config_hash()
    assert validate(BASE, base_dir=tmp_path, seed_override=9).config_hash() != a.config_hash()
    moved = validate({**BASE, "outputs": {"dir": "elsewhere"}}, base_dir=tmp_path)
    assert moved.config_hash() == a.config_hash()


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(BASE))
    assert load_config(good, seed_override=11).seed == 11
