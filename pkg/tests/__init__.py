"""Hebbnet test suite."""
