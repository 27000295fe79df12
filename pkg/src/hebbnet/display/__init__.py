"""Terminal display."""

from hebbnet.display.renderer import DisplayRenderer

__all__ = ["DisplayRenderer"]
