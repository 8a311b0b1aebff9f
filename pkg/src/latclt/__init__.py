"""Monte Carlo experiments on lattice point counts, spiraling and Diophantine approximation."""

__version__ = "0.1.0"
