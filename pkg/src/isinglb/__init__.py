"""Sample-complexity lower bounds for learning Ising model graphs."""

__version__ = "0.1.0"
