import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zenoprotect import records
from zenoprotect.code_search import CodeSpace, CodingMatrix, complete_coding_matrix, find_code
from zenoprotect.control import ControlPair, TimingVector, synthesize_timings
from zenoprotect.error_model import FieldProfile, GeneratorSet
from zenoprotect.random_coding import SuppressionRecord
from zenoprotect.zeno import ZenoConfig, run_protection


def _roundtrip(rec):
    back = records.loads(records.dumps(rec))
    assert back == rec
    assert records.dumps(back) == records.dumps(rec)
    return back


def test_coding_matrix_bitwise():
    gens = GeneratorSet.random(8, 3, seed=1)
    cm = complete_coding_matrix(find_code(gens, 2, seed=1), seed=0)
    back = _roundtrip(cm)
    assert back.matrix.tobytes() == cm.matrix.tobytes()


def test_all_record_kinds_roundtrip():
    gens = GeneratorSet.random(4, 1, seed=2)
    code = find_code(gens, 1, seed=0)
    _roundtrip(code)
    _roundtrip(gens)
    _roundtrip(GeneratorSet([], dim=3))
    ctrl = ControlPair.random(4, seed=3)
    _roundtrip(ctrl)
    _roundtrip(TimingVector(np.array([0.1, 1 / 3, 2.0]), (0, 2)))
    rep = synthesize_timings(ctrl, 1, gens, (0.1, 2.0), seed=4)
    back = _roundtrip(rep)
    assert back.control == ctrl
    run = run_protection(np.eye(4)[0], complete_coding_matrix(code), gens, [FieldProfile("constant", 0.3)],
                         ZenoConfig(0.01, 4))
    _roundtrip(run)
    _roundtrip(SuppressionRecord(5, 1, "haar", 0, 0.0123, 0.05, 2.0**-4, seed=3))


@settings(max_examples=40, deadline=None)
@given(arrays(np.complex128, st.tuples(st.integers(1, 4), st.integers(1, 5)),
              elements=st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e300)))
def test_complex_arrays_survive_exactly(mat):
    cm = CodingMatrix(mat if mat.shape[0] == mat.shape[1] else np.eye(2, dtype=complex), 1)
    back = records.loads(records.dumps(cm))
    assert back.matrix.tobytes() == cm.matrix.tobytes()
    cs = CodeSpace(mat, 1e-3, False, 7, 1, (0.5, 1e-300))
    assert records.loads(records.dumps(cs)) == cs


def test_truncated_input_raises_with_position():
    text = records.dumps(ControlPair.random(3, seed=0))
    lines = text.splitlines()
    for cut in (len(lines) - 1, len(lines) - 3, 2):
        broken = "\n".join(lines[:cut]) + "\n"
        with pytest.raises(records.RecordParseError) as err:
            records.loads(broken)
        assert err.value.line is not None


def test_malformed_inputs():
    with pytest.raises(records.RecordParseError):
        records.loads("not a record\n")
    with pytest.raises(records.RecordParseError):
        records.loads("%zenoprotect coding-matrix v9\n%end\n")
    text = records.dumps(CodingMatrix(np.eye(2, dtype=complex), 1)).replace("1 0 0 0", "1 zero 0 0")
    with pytest.raises(records.RecordParseError, match="line"):
        records.loads(text)
    with pytest.raises(records.RecordParseError):
        records.loads("%zenoprotect mystery v1\n%end\n")


def test_file_helpers(tmp_path):
    cm = CodingMatrix(np.eye(3, dtype=complex), 2)
    path = tmp_path / "cm.txt"
    records.save(path, cm)
    assert records.load(path) == cm
    assert path.read_text().startswith("%zenoprotect coding-matrix v1\n")
