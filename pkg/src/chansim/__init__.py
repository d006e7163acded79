"""Channel simulation: communicating samples with shared randomness."""

__version__ = "0.1.0"
