"""Checkpoint format: round trips, corruption detection, error classes."""

import struct

import numpy as np
import pytest

from lsteeg import checkpoint
from lsteeg.errors import ChecksumError, FileFormatError, VersionMismatchError
from lsteeg.model import LsteegConfig, build

TINY = dict(n_channels=3, n_samples=8, n_outer=4, n_inner=3, n_latent=5)


@pytest.fixture
def ckpt_path(tmp_path):
    m = build(LsteegConfig(rng_seed=21, **TINY))
    path = tmp_path / "model.lstg"
    checkpoint.save(m, path)
    return m, path


def test_round_trip_parameters_and_config(ckpt_path):
    m, path = ckpt_path
    loaded = checkpoint.load(path)
    assert loaded.config == m.config
    for a, b in zip(m.parameters(), loaded.parameters()):
        np.testing.assert_array_equal(a, b)


def test_save_load_save_byte_identical(ckpt_path, tmp_path):
    m, path = ckpt_path
    loaded = checkpoint.load(path)
    path2 = tmp_path / "model2.lstg"
    checkpoint.save(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_payload_tamper_raises_checksum_error(ckpt_path):
    m, path = ckpt_path
    blob = bytearray(path.read_bytes())
    blob[-200] ^= 0x01  # inside the parameter payload
    path.write_bytes(bytes(blob))
    with pytest.raises(ChecksumError):
        checkpoint.load(path)


def test_every_single_byte_flip_is_detected(ckpt_path):
    # Acceptance-level property at small scale: flipping any one byte must
    # raise some FileFormatError subclass (checksum, version, magic, ...).
    m, path = ckpt_path
    original = path.read_bytes()
    rng = np.random.default_rng(0)
    for pos in rng.choice(len(original), size=40, replace=False):
        blob = bytearray(original)
        blob[pos] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(FileFormatError):
            checkpoint.load(path)
    path.write_bytes(original)
    checkpoint.load(path)


def test_truncated_file(ckpt_path):
    m, path = ckpt_path
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) // 2])
    with pytest.raises(FileFormatError):
        checkpoint.load(path)


def test_bad_magic(ckpt_path):
    m, path = ckpt_path
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(FileFormatError) as exc:
        checkpoint.load(path)
    assert not isinstance(exc.value, (ChecksumError, VersionMismatchError))


def test_version_mismatch(ckpt_path):
    m, path = ckpt_path
    blob = bytearray(path.read_bytes())
    blob[4:8] = struct.pack("<I", 99)
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionMismatchError):
        checkpoint.load(path)


def test_loaded_model_reconstructs_identically(ckpt_path):
    m, path = ckpt_path
    loaded = checkpoint.load(path)
    x = np.random.default_rng(7).normal(size=(3, 8))
    np.testing.assert_array_equal(m.reconstruct(x), loaded.reconstruct(x))
