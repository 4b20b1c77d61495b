"""Test suite for thermo_homogenization."""
