"""Function theory on finite-dimensional real commutative superalgebras."""

__version__ = "0.1.0"
