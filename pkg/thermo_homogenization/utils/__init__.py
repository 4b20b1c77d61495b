"""Utility modules."""

from thermo_homogenization.utils.fingerprint import (
    calculate_sha256,
    canonical_json,
    data_fingerprint,
    verify_sha256,
)

__all__ = [
    "calculate_sha256",
    "canonical_json",
    "data_fingerprint",
    "verify_sha256",
]
