"""Path-sensitive unit-test generation for a small class-based subject language."""

__version__ = "0.1.0"
