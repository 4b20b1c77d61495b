"""SHA256 fingerprints of files and JSON-compatible data."""

import hashlib
import json
from pathlib import Path
from typing import Any


def calculate_sha256(file_path: Path, chunk_size: int = 8192) -> str:
    """
    Calculate SHA256 checksum of a file.

    Args:
        file_path: Path to file
        chunk_size: Read chunk size in bytes

    Returns:
        Hex string of SHA256 hash
    """
    sha256 = hashlib.sha256()
    with Path(file_path).open("rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            sha256.update(chunk)
    return sha256.hexdigest()


def verify_sha256(file_path: Path, expected_hash: str) -> bool:
    """
    Verify SHA256 checksum of a file.

    Raises:
        FileNotFoundError: If file doesn't exist
    """
    file_path = Path(file_path)
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    return calculate_sha256(file_path).lower() == expected_hash.lower()


def canonical_json(data: Any) -> str:
    """Key-sorted compact JSON; floats keep their shortest round-trip form."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def data_fingerprint(data: Any) -> str:
    """SHA256 of the canonical JSON encoding of ``data``."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
