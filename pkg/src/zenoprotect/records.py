"""Plain-text persistence for domain records.

Layout::

    %zenoprotect <kind> v1
    <name> <int|float|bool|str> <value>
    @<name> <complex|float|int> <d1> [<d2> ...]
    <one line per leading index; complex entries as "re im" pairs>
    %end

Floats are written with 17 significant digits, so a reload reproduces every
double bit for bit. Arrays are row-major.
"""
import json
from pathlib import Path

import numpy as np

from .code_search import CodeSpace, CodingMatrix
from .control import ControlPair, SynthesisReport, TimingVector
from .error_model import GeneratorSet
from .random_coding import SuppressionRecord
from .zeno import ZenoRunRecord

MAGIC = "%zenoprotect"
VERSION = "v1"


class RecordParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _fmt(x):
    return format(float(x), ".17g")


def _encode_array(name, arr):
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        dtype = "complex"
    elif arr.dtype.kind in "iub":
        dtype = "int"
    else:
        dtype = "float"
    shape = arr.shape if arr.ndim else (1,)
    lines = [f"@{name} {dtype} {' '.join(str(d) for d in shape)}"]
    flat = arr.reshape(-1, shape[-1]) if arr.size else np.zeros((0, shape[-1]), arr.dtype)
    for row in flat:
        if dtype == "complex":
            lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
        elif dtype == "int":
            lines.append(" ".join(str(int(v)) for v in row))
        else:
            lines.append(" ".join(_fmt(v) for v in row))
    return lines


def _encode_scalar(name, value):
    if isinstance(value, (bool, np.bool_)):
        return f"{name} bool {'true' if value else 'false'}"
    if isinstance(value, (int, np.integer)):
        return f"{name} int {int(value)}"
    if isinstance(value, (float, np.floating)):
        return f"{name} float {_fmt(value)}"
    if isinstance(value, str):
        return f"{name} str {json.dumps(value)}"
    raise TypeError(f"cannot encode scalar {name}={value!r}")


def _render(kind, scalars, arrays):
    lines = [f"{MAGIC} {kind} {VERSION}"]
    lines += [_encode_scalar(k, v) for k, v in scalars.items()]
    for k, v in arrays.items():
        lines += _encode_array(k, v)
    lines.append("%end")
    return "\n".join(lines) + "\n"


def _to_parts(rec):
    if isinstance(rec, CodeSpace):
        return "code-space", {
            "residual": float(rec.residual), "converged": bool(rec.converged),
            "iterations": int(rec.iterations), "restarts": int(rec.restarts),
        }, {"codewords": rec.codewords, "residual_history": np.asarray(rec.residual_history, float)}
    if isinstance(rec, CodingMatrix):
        return "coding-matrix", {"dim": rec.dim, "code_dim": int(rec.code_dim)}, {"matrix": rec.matrix}
    if isinstance(rec, TimingVector):
        return "timing-vector", {}, {"timings": rec.timings,
                                     "free_set": np.asarray(rec.free_set, dtype=int)}
    if isinstance(rec, ControlPair):
        return "control-pair", {"sign_reversible": rec.sign_reversible}, {"H_a": rec.H_a, "H_b": rec.H_b}
    if isinstance(rec, SynthesisReport):
        scalars = {"rotations": int(rec.rotations), "converged": bool(rec.converged),
                   "iterations": int(rec.iterations), "restarts": int(rec.restarts)}
        arrays = {"timings": rec.final_timings.timings,
                  "free_set": np.asarray(rec.final_timings.free_set, dtype=int),
                  "G_history": np.asarray(rec.G_history, float),
                  "accepted": np.asarray(rec.accepted, dtype=int)}
        if rec.control is not None:
            scalars["sign_reversible"] = rec.control.sign_reversible
            arrays["H_a"], arrays["H_b"] = rec.control.H_a, rec.control.H_b
        return "synthesis-report", scalars, arrays
    if isinstance(rec, GeneratorSet):
        return "generator-set", {"dim": rec.dim, "labels": json.dumps(list(rec.labels))}, {
            "generators": rec.generators}
    if isinstance(rec, ZenoRunRecord):
        return "zeno-run", {"cumulative_survival": float(rec.cumulative_survival),
                            "failed_cycle": int(rec.failed_cycle)}, {
            "survival": rec.survival, "fidelity": rec.fidelity, "leak": rec.leak, "times": rec.times}
    if isinstance(rec, SuppressionRecord):
        return "suppression-record", {
            "n": rec.n, "k": rec.k, "coding_source": rec.coding_source,
            "switch_count": rec.switch_count, "mean_abs": rec.mean_abs, "max_abs": rec.max_abs,
            "predicted": rec.predicted, "seed": rec.seed}, {}
    raise TypeError(f"no record format for {type(rec).__name__}")


def dumps(rec):
    return _render(*_to_parts(rec))


def _parse_scalar(tokens, lineno):
    if len(tokens) < 3:
        raise RecordParseError("scalar line needs name, type and value", lineno)
    name, typ, raw = tokens[0], tokens[1], " ".join(tokens[2:])
    try:
        if typ == "int":
            return name, int(raw)
        if typ == "float":
            return name, float(raw)
        if typ == "bool":
            if raw not in ("true", "false"):
                raise ValueError(raw)
            return name, raw == "true"
        if typ == "str":
            return name, json.loads(raw)
    except ValueError as exc:
        raise RecordParseError(f"bad {typ} value {raw!r}", lineno) from exc
    raise RecordParseError(f"unknown scalar type {typ!r}", lineno)


def _parse(text):
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise RecordParseError("missing record header", 1)
    head = lines[0].split()
    if len(head) != 3 or head[2] != VERSION:
        raise RecordParseError(f"unsupported header {lines[0]!r}", 1)
    kind = head[1]
    scalars, arrays = {}, {}
    i = 1
    while True:
        if i >= len(lines) or (lines[i] == "" and i == len(lines) - 1):
            raise RecordParseError("unexpected end of input (missing %end)", i + 1)
        line = lines[i]
        if line == "%end":
            break
        tokens = line.split()
        if not tokens:
            raise RecordParseError("blank line inside record", i + 1)
        if tokens[0].startswith("@"):
            name, dtype = tokens[0][1:], tokens[1] if len(tokens) > 1 else None
            try:
                shape = tuple(int(d) for d in tokens[2:])
            except ValueError as exc:
                raise RecordParseError("bad array shape", i + 1) from exc
            if dtype not in ("complex", "float", "int") or not shape:
                raise RecordParseError(f"bad array declaration {line!r}", i + 1)
            n_rows = int(np.prod(shape[:-1])) if len(shape) > 1 else (1 if shape[0] else 0)
            width = shape[-1] * (2 if dtype == "complex" else 1)
            rows = []
            for r in range(n_rows):
                j = i + 1 + r
                if j >= len(lines) or lines[j] == "%end" or (lines[j] == "" and j == len(lines) - 1):
                    raise RecordParseError(f"array {name} truncated after {r} of {n_rows} rows", j + 1)
                vals = lines[j].split()
                if len(vals) != width:
                    raise RecordParseError(f"array {name} row has {len(vals)} values, expected {width}", j + 1)
                try:
                    rows.append([int(v) for v in vals] if dtype == "int" else [float(v) for v in vals])
                except ValueError as exc:
                    raise RecordParseError(f"non-numeric value in array {name}", j + 1) from exc
            if dtype == "complex":
                flat = np.array(rows, dtype=float).reshape(-1, 2)
                data = (flat[:, 0] + 1j * flat[:, 1]) if flat.size else np.zeros(0, complex)
            else:
                data = np.array(rows, dtype=int if dtype == "int" else float)
            arrays[name] = data.reshape(shape)
            i += 1 + n_rows
        else:
            k, v = _parse_scalar(tokens, i + 1)
            scalars[k] = v
            i += 1
    return kind, scalars, arrays


def _need(d, key, kind):
    if key not in d:
        raise RecordParseError(f"{kind} record lacks {key!r}")
    return d[key]


def loads(text):
    kind, s, a = _parse(text)
    g = lambda d, key: _need(d, key, kind)  # noqa: E731
    if kind == "code-space":
        return CodeSpace(g(a, "codewords"), g(s, "residual"), g(s, "converged"), g(s, "iterations"),
                         g(s, "restarts"), tuple(float(x) for x in g(a, "residual_history")))
    if kind == "coding-matrix":
        return CodingMatrix(g(a, "matrix"), g(s, "code_dim"))
    if kind == "timing-vector":
        return TimingVector(g(a, "timings"), tuple(int(j) for j in g(a, "free_set")))
    if kind == "control-pair":
        return ControlPair(g(a, "H_a"), g(a, "H_b"), g(s, "sign_reversible"))
    if kind == "synthesis-report":
        ctrl = None
        if "H_a" in a:
            ctrl = ControlPair(a["H_a"], a["H_b"], s.get("sign_reversible", True))
        return SynthesisReport(
            final_timings=TimingVector(g(a, "timings"), tuple(int(j) for j in g(a, "free_set"))),
            G_history=[float(x) for x in g(a, "G_history")],
            rotations=g(s, "rotations"), converged=g(s, "converged"),
            iterations=g(s, "iterations"), restarts=g(s, "restarts"),
            accepted=[bool(x) for x in g(a, "accepted")], control=ctrl)
    if kind == "generator-set":
        return GeneratorSet(g(a, "generators"), json.loads(g(s, "labels")), dim=g(s, "dim"))
    if kind == "zeno-run":
        return ZenoRunRecord(g(a, "survival"), g(a, "fidelity"), g(a, "leak"), g(a, "times"),
                             g(s, "cumulative_survival"), g(s, "failed_cycle"))
    if kind == "suppression-record":
        return SuppressionRecord(g(s, "n"), g(s, "k"), g(s, "coding_source"), g(s, "switch_count"),
                                 g(s, "mean_abs"), g(s, "max_abs"), g(s, "predicted"), g(s, "seed"))
    raise RecordParseError(f"unknown record kind {kind!r}", 1)


def save(path, rec):
    Path(path).write_text(dumps(rec))


def load(path):
    return loads(Path(path).read_text())
