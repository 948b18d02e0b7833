"""Labeled epoch collections and their on-disk format.

The dataset file is a small binary container:

    bytes 0..3   magic ``LSDS``
    u32          format version (currently 1)
    u32          header length
    header       UTF-8 JSON: sample_rate, shape, labels, subjects,
                 partitions, and the generation spec (if any)
    payload      inputs block then targets block, float32 little-endian,
                 ordered (epoch, channel, time)
    u64          checksum: blake2b-64 of header + payload

Arrays are float64 in memory; saving truncates to float32 (the storage
precision), after which save/load/save round-trips are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import as_f64
from .errors import (ChecksumError, ConfigError, DimensionError,
                     FileFormatError, VersionMismatchError)

MAGIC = b"LSDS"
VERSION = 1

CLEAN = "clean"
NOISY = "noisy"
PARTITIONS = ("train", "val", "test")

__all__ = ["EpochDataset", "save", "load", "CLEAN", "NOISY", "PARTITIONS"]


@dataclass
class EpochDataset:
    """Epochs with per-epoch labels, subjects, partitions, and paired targets.

    ``targets[k]`` is the artifact-free counterpart of ``inputs[k]``; for
    clean epochs the two are identical. ``partitions[k]`` is one of
    train/val/test or "" before a split is applied.
    """
    inputs: np.ndarray            # (n, C, T)
    targets: np.ndarray           # (n, C, T)
    labels: list[str]
    subject_ids: list[str]
    partitions: list[str]
    sample_rate: float
    spec: dict | None = None

    def __post_init__(self):
        self.inputs = as_f64(self.inputs, "inputs")
        self.targets = as_f64(self.targets, "targets")
        if self.inputs.ndim != 3:
            raise DimensionError("inputs must be (n_epochs, n_channels, n_samples)")
        if self.targets.shape != self.inputs.shape:
            raise DimensionError("targets must match inputs shape")
        n = self.inputs.shape[0]
        for name, col in (("labels", self.labels), ("subject_ids", self.subject_ids),
                          ("partitions", self.partitions)):
            if len(col) != n:
                raise DimensionError(f"{name} must have one entry per epoch")
        bad = set(self.labels) - {CLEAN, NOISY}
        if bad:
            raise ConfigError(f"unknown labels: {sorted(bad)}")
        bad = set(self.partitions) - set(PARTITIONS) - {""}
        if bad:
            raise ConfigError(f"unknown partitions: {sorted(bad)}")
        self._check_subject_partitions()

    def _check_subject_partitions(self):
        seen: dict[str, str] = {}
        for subject, part in zip(self.subject_ids, self.partitions):
            if part == "":
                continue
            if seen.setdefault(subject, part) != part:
                raise ConfigError(
                    f"subject {subject} appears in multiple partitions")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_channels(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[2]

    def subjects(self) -> list[str]:
        out = []
        for s in self.subject_ids:
            if s not in out:
                out.append(s)
        return out

    def select(self, mask) -> "EpochDataset":
        idx = np.flatnonzero(np.asarray(mask))
        return EpochDataset(
            inputs=self.inputs[idx].copy(),
            targets=self.targets[idx].copy(),
            labels=[self.labels[i] for i in idx],
            subject_ids=[self.subject_ids[i] for i in idx],
            partitions=[self.partitions[i] for i in idx],
            sample_rate=self.sample_rate,
            spec=self.spec,
        )

    def partition(self, name: str) -> "EpochDataset":
        if name not in PARTITIONS:
            raise ConfigError(f"unknown partition {name!r}")
        return self.select([p == name for p in self.partitions])

    def with_label(self, label: str) -> "EpochDataset":
        return self.select([l == label for l in self.labels])


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _digest64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def save(ds: EpochDataset, path) -> None:
    n, c, t = ds.inputs.shape
    header = json.dumps({
        "sample_rate": ds.sample_rate,
        "n_epochs": n, "n_channels": c, "n_samples": t,
        "labels": ds.labels,
        "subjects": ds.subject_ids,
        "partitions": ds.partitions,
        "spec": ds.spec,
    }, separators=(",", ":")).encode("utf-8")
    payload = (np.ascontiguousarray(ds.inputs, dtype="<f4").tobytes()
               + np.ascontiguousarray(ds.targets, dtype="<f4").tobytes())
    checked = header + payload
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header)))
        fh.write(checked)
        fh.write(struct.pack("<Q", _digest64(checked)))


def load(path) -> EpochDataset:
    blob = Path(path).read_bytes()
    if len(blob) < 12:
        raise FileFormatError(f"{path}: truncated dataset (no header)")
    if blob[:4] != MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:4]!r}")
    version, header_len = struct.unpack("<II", blob[4:12])
    if version != VERSION:
        raise VersionMismatchError(f"{path}: format version {version}, expected {VERSION}")
    body_end = 12 + header_len
    if len(blob) < body_end + 8:
        raise FileFormatError(f"{path}: truncated dataset (header incomplete)")
    header_bytes = blob[12:body_end]
    try:
        meta = json.loads(header_bytes.decode("utf-8"))
        n, c, t = int(meta["n_epochs"]), int(meta["n_channels"]), int(meta["n_samples"])
        labels = [str(x) for x in meta["labels"]]
        subjects = [str(x) for x in meta["subjects"]]
        partitions = [str(x) for x in meta["partitions"]]
        sample_rate = float(meta["sample_rate"])
        spec = meta.get("spec")
    except (ValueError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{path}: malformed header: {exc}") from exc

    block = n * c * t * 4
    payload_end = body_end + 2 * block
    if len(blob) < payload_end + 8:
        raise FileFormatError(f"{path}: truncated dataset (payload incomplete)")
    if len(blob) > payload_end + 8:
        raise FileFormatError(f"{path}: trailing bytes after checksum")
    payload = blob[body_end:payload_end]
    (stored,) = struct.unpack("<Q", blob[payload_end:payload_end + 8])
    if stored != _digest64(header_bytes + payload):
        raise ChecksumError(f"{path}: checksum mismatch, file is corrupt")

    inputs = np.frombuffer(payload[:block], dtype="<f4").astype(np.float64)
    targets = np.frombuffer(payload[block:], dtype="<f4").astype(np.float64)
    return EpochDataset(
        inputs=inputs.reshape(n, c, t), targets=targets.reshape(n, c, t),
        labels=labels, subject_ids=subjects, partitions=partitions,
        sample_rate=sample_rate, spec=spec,
    )
