"""Tests for utility functions."""

import hashlib

import pytest

from thermo_homogenization.utils import (
    calculate_sha256,
    canonical_json,
    data_fingerprint,
    verify_sha256,
)


def test_calculate_sha256(tmp_path):
    """Test SHA256 calculation."""
    test_file = tmp_path / "series.csv"
    test_file.write_text("t,theta_max\n0.0,0.2\n")

    expected = hashlib.sha256(b"t,theta_max\n0.0,0.2\n").hexdigest()
    assert calculate_sha256(test_file) == expected


def test_calculate_sha256_small_chunks(tmp_path):
    test_file = tmp_path / "data.bin"
    test_file.write_bytes(bytes(range(256)) * 10)
    assert calculate_sha256(test_file, chunk_size=7) == calculate_sha256(test_file)


def test_verify_sha256_success(tmp_path):
    """Test successful checksum verification."""
    test_file = tmp_path / "table.json"
    test_file.write_text("{}")

    assert verify_sha256(test_file, calculate_sha256(test_file).upper()) is True


def test_verify_sha256_failure(tmp_path):
    """Test failed checksum verification."""
    test_file = tmp_path / "table.json"
    test_file.write_text("{}")

    assert verify_sha256(test_file, "0" * 64) is False


def test_verify_sha256_missing_file(tmp_path):
    """Test checksum verification with missing file."""
    with pytest.raises(FileNotFoundError):
        verify_sha256(tmp_path / "nonexistent.json", "0" * 64)


class TestDataFingerprint:
    """Fingerprints of JSON-compatible data (table shape and parameter checks)."""

    def test_key_order_irrelevant(self):
        assert data_fingerprint({"kind": "circle", "radius": 0.25}) == data_fingerprint(
            {"radius": 0.25, "kind": "circle"}
        )

    def test_value_change_detected(self):
        assert data_fingerprint({"lame_mu": 1.0}) != data_fingerprint({"lame_mu": 1.0 + 1e-15})

    def test_canonical_form(self):
        assert canonical_json({"b": [1, 2.5], "a": None}) == '{"a":null,"b":[1,2.5]}'

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            canonical_json({"x": float("nan")})
