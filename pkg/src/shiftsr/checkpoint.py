"""Bit-exact single-file model serialization.

Layout: magic "SCN1", uint32-le header length, UTF-8 JSON manifest
(config plus an ordered tensor table of name/shape/offset/length),
then the raw little-endian float32 payload with every tensor offset
16-byte aligned.  Offsets are relative to the start of the payload.
"""
from __future__ import annotations

import json
import struct
from dataclasses import asdict

import numpy as np

from .errors import CheckpointError
from .model import Model, ModelConfig, layer_inventory

MAGIC = b"SCN1"
_ALIGN = 16


def _align(n: int) -> int:
    return (n + _ALIGN - 1) // _ALIGN * _ALIGN


def write_checkpoint(model: Model, path: str) -> None:
    table = []
    offset = 0
    for name, w in model.weights.items():
        length = w.size * 4
        table.append(
            {"name": name, "shape": list(w.shape), "offset": offset, "length": length}
        )
        offset = _align(offset + length)
    header = {"config": asdict(model.config), "tensors": table}
    body = json.dumps(header, indent=1).encode()
    # pad the header with spaces so the payload starts 16-byte aligned
    pad = _align(8 + len(body)) - (8 + len(body))
    body += b" " * pad
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(body)))
        fh.write(body)
        pos = 0
        for entry, w in zip(table, model.weights.values()):
            fh.write(b"\x00" * (entry["offset"] - pos))
            raw = np.ascontiguousarray(w, dtype="<f4").tobytes()
            fh.write(raw)
            pos = entry["offset"] + len(raw)


def read_checkpoint(path: str) -> Model:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 8:
        raise CheckpointError(f"{path}: truncated header")
    (hlen,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + hlen:
        raise CheckpointError(f"{path}: header extends past end of file")
    try:
        header = json.loads(data[8:8 + hlen].decode())
        config = ModelConfig(**header["config"])
        table = header["tensors"]
    except (ValueError, KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: malformed manifest ({exc})") from exc

    payload = data[8 + hlen:]
    weights: dict[str, np.ndarray] = {}
    prev_end = 0
    for entry in table:
        off, length = entry["offset"], entry["length"]
        if off < prev_end:
            raise CheckpointError(f"{path}: overlapping tensor table entries")
        shape = tuple(entry["shape"])
        if int(np.prod(shape)) * 4 != length:
            raise CheckpointError(
                f"{path}: tensor {entry['name']} shape {shape} != length {length}"
            )
        if off + length > len(payload):
            raise CheckpointError(f"{path}: payload shorter than tensor table")
        arr = np.frombuffer(payload, dtype="<f4", count=length // 4, offset=off)
        weights[entry["name"]] = arr.reshape(shape).astype(np.float32)
        prev_end = off + length

    expected = layer_inventory(config)
    got = [(name, tuple(w.shape)) for name, w in weights.items()]
    if got != [(name, tuple(shape)) for name, shape in expected]:
        raise CheckpointError(f"{path}: tensor table does not match config inventory")
    if not all(np.isfinite(w).all() for w in weights.values()):
        raise CheckpointError(f"{path}: non-finite weight values")
    return Model(config, weights)
