"""Lower bounds for simultaneous Diophantine approximation constants."""

__version__ = "0.1.0"
