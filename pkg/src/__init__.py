"""Text synopsis generation for long segmented videos."""

__version__ = "0.1.0"
