"""LEO constellation delay simulator and SFC routing laboratory."""

__version__ = "0.1.0"
