"""Binary model checkpoints.

Layout (all integers little-endian):

    bytes 0..3   magic ``LSTG``
    u32          format version (currently 1)
    u32          header length in bytes
    header       UTF-8 JSON: {"config": {...}, "tensors": [[name, [dims]], ...]}
    payload      float64 little-endian tensor data, C order, in header order
    u64          checksum: blake2b-64 of header + payload

Round trips are bit-exact: save(load(save(m))) produces identical bytes.
Loading verifies magic, version, completeness, and checksum, raising
FileFormatError / VersionMismatchError / ChecksumError respectively.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ChecksumError, FileFormatError, VersionMismatchError
from .model import LsteegConfig, LsteegModel

MAGIC = b"LSTG"
VERSION = 1

__all__ = ["save", "load", "MAGIC", "VERSION"]


def _digest64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def save(model: LsteegModel, path) -> None:
    """Write the model to ``path`` in the format described above."""
    names = model.parameter_names()
    params = model.parameters()
    header = json.dumps({
        "config": model.config.to_dict(),
        "tensors": [[n, list(p.shape)] for n, p in zip(names, params)],
    }, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in params)
    checked = header + payload
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header)))
        fh.write(checked)
        fh.write(struct.pack("<Q", _digest64(checked)))


def load(path) -> LsteegModel:
    """Read and verify a checkpoint; returns a fully populated model."""
    blob = Path(path).read_bytes()
    if len(blob) < 12:
        raise FileFormatError(f"{path}: truncated checkpoint (no header)")
    if blob[:4] != MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:4]!r}")
    version, header_len = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, expected {VERSION}")
    body_end = 12 + header_len
    if len(blob) < body_end + 8:
        raise FileFormatError(f"{path}: truncated checkpoint (header incomplete)")
    header_bytes = blob[12:body_end]
    try:
        header = json.loads(header_bytes.decode("utf-8"))
        config = LsteegConfig(**header["config"])
        tensors = [(str(n), tuple(int(d) for d in dims))
                   for n, dims in header["tensors"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed header: {exc}") from exc

    payload_len = sum(int(np.prod(shape)) * 8 for _, shape in tensors)
    payload_end = body_end + payload_len
    if len(blob) < payload_end + 8:
        raise FileFormatError(f"{path}: truncated checkpoint (payload incomplete)")
    if len(blob) > payload_end + 8:
        raise FileFormatError(f"{path}: trailing bytes after checksum")
    payload = blob[body_end:payload_end]
    (stored,) = struct.unpack("<Q", blob[payload_end:payload_end + 8])
    if stored != _digest64(header_bytes + payload):
        raise ChecksumError(f"{path}: checksum mismatch, file is corrupt")

    model = from_shapes(config, tensors)
    offset = 0
    values = []
    for _, shape in tensors:
        nbytes = int(np.prod(shape)) * 8
        arr = np.frombuffer(payload[offset:offset + nbytes], dtype="<f8")
        values.append(arr.astype(np.float64).reshape(shape))
        offset += nbytes
    model.set_parameters(values)
    return model


def from_shapes(config: LsteegConfig, tensors: list) -> LsteegModel:
    """Build a model and confirm the stored shape table matches it."""
    from .model import build
    model = build(config)
    expected = list(zip(model.parameter_names(),
                        [p.shape for p in model.parameters()]))
    got = [(n, tuple(s)) for n, s in tensors]
    if got != expected:
        raise FileFormatError(
            f"shape table mismatch: file {got[:3]}..., model {expected[:3]}...")
    return model
