"""Readers and writers for model, sample and report files."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import Graph, IsingModel, SampleSet

FORMAT_VERSION = 1
BINARY_MAGIC = b"ISNG"


class FormatError(ValueError):
    """Malformed input file; the message names the offending line or field."""


def model_to_dict(model: IsingModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "p": model.p,
        "d": model.d,
        "alpha": model.alpha,
        "beta": model.beta,
        "h": model.h,
        "edges": [{"i": i, "j": j, "theta": model.couplings.get((i, j), 0.0)}
                  for i, j in model.graph.sorted_edges()],
        "fields": list(model.fields),
    }


def _field(doc: dict, name: str, kind):
    if name not in doc:
        raise FormatError(f"missing field {name!r}")
    value = doc[name]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError(f"field {name!r} must be an integer, got {value!r}")
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise FormatError(f"field {name!r} must be a number, got {value!r}")
        value = float(value)
    return value


def model_from_dict(doc: dict) -> IsingModel:
    if not isinstance(doc, dict):
        raise FormatError("model document must be a JSON object")
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    p = _field(doc, "p", int)
    d = _field(doc, "d", int)
    alpha, beta, h = (_field(doc, k, float) for k in ("alpha", "beta", "h"))
    edges = _field(doc, "edges", list)
    fields = _field(doc, "fields", list)
    if len(fields) != p:
        raise FormatError(f"field 'fields' has {len(fields)} entries, expected p={p}")
    for k, f in enumerate(fields):
        if isinstance(f, bool) or not isinstance(f, (int, float)):
            raise FormatError(f"fields[{k}] must be a number, got {f!r}")
    couplings = {}
    for k, e in enumerate(edges):
        if not isinstance(e, dict) or not {"i", "j", "theta"} <= set(e):
            raise FormatError(f"edges[{k}] must have keys i, j, theta")
        i, j, theta = e["i"], e["j"], e["theta"]
        for key, val, kinds in (("i", i, int), ("j", j, int), ("theta", theta, (int, float))):
            if isinstance(val, bool) or not isinstance(val, kinds):
                raise FormatError(f"edges[{k}].{key} has invalid value {val!r}")
        if not (0 <= i < p and 0 <= j < p) or i == j:
            raise FormatError(f"edges[{k}] = ({i}, {j}) is not a valid edge for p={p}")
        key = (min(i, j), max(i, j))
        if key in couplings:
            raise FormatError(f"edges[{k}] duplicates edge {key}")
        couplings[key] = float(theta)
    try:
        return IsingModel(Graph(p, frozenset(couplings)), couplings, tuple(float(f) for f in fields),
                          alpha=alpha, beta=beta, h=h, d=d)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def write_model(model: IsingModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def read_model(path) -> IsingModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return model_from_dict(doc)


def write_samples_text(samples: SampleSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{samples.p} {samples.n}\n")
        for row in samples.spins:
            fh.write(" ".join("1" if v > 0 else "-1" for v in row))
            fh.write("\n")


def read_samples_text(path) -> SampleSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(t.isdigit() for t in header):
            raise FormatError(f"{path}: line 1: expected header 'p n', got {' '.join(header)!r}")
        p, n = int(header[0]), int(header[1])
        out = np.empty((n, p), dtype=np.int8)
        row = 0
        for lineno, line in enumerate(fh, start=2):
            tokens = line.split()
            if not tokens:
                continue
            if row >= n:
                raise FormatError(f"{path}: line {lineno}: more than n={n} rows")
            if len(tokens) != p:
                raise FormatError(f"{path}: line {lineno}: expected {p} tokens, got {len(tokens)}")
            for col, t in enumerate(tokens):
                if t in ("1", "+1"):
                    out[row, col] = 1
                elif t == "-1":
                    out[row, col] = -1
                else:
                    raise FormatError(f"{path}: line {lineno}: token {col + 1} is {t!r}, expected +-1")
            row += 1
        if row != n:
            raise FormatError(f"{path}: expected {n} rows, found {row}")
    return SampleSet(out)


def write_samples_binary(samples: SampleSet, path) -> None:
    bits = np.packbits(samples.spins > 0, axis=1, bitorder="little")
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<II", samples.p, samples.n))
        fh.write(bits.tobytes())


def read_samples_binary(path) -> SampleSet:
    raw = Path(path).read_bytes()
    if raw[:4] != BINARY_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header")
    p, n = struct.unpack("<II", raw[4:12])
    stride = (p + 7) // 8
    body = raw[12:]
    if len(body) != n * stride:
        raise FormatError(f"{path}: expected {n * stride} payload bytes, got {len(body)}")
    packed = np.frombuffer(body, dtype=np.uint8).reshape(n, stride)
    pad = stride * 8 - p
    if pad and n and np.any(packed[:, -1] >> (8 - pad)):
        raise FormatError(f"{path}: nonzero padding bits")
    bits = np.unpackbits(packed, axis=1, count=p, bitorder="little") if n else np.zeros((0, p), np.uint8)
    return SampleSet((2 * bits.astype(np.int8) - 1))


def read_samples(path) -> SampleSet:
    with open(path, "rb") as fh:
        magic = fh.read(4)
    return read_samples_binary(path) if magic == BINARY_MAGIC else read_samples_text(path)


def write_samples(samples: SampleSet, path, binary: bool | None = None) -> None:
    if binary is None:
        binary = str(path).endswith((".bin", ".isng"))
    (write_samples_binary if binary else write_samples_text)(samples, path)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
