"""sepbound: bounds on implementing non-local operations with separable channels."""

__version__ = "0.1.0"
