"""Selftest suites run by `fraclab selftest`."""
