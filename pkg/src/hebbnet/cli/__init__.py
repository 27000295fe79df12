"""CLI interface for Hebbnet."""

from hebbnet.cli.main import cli

__all__ = ["cli"]
