"""One-dimensional compressible lattice Boltzmann solver with equilibria built
from the inverse velocity-moment (assignment) matrix."""

__version__ = "0.1.0"
