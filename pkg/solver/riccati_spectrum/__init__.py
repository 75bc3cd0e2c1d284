"""Eigenvalues and eigenfunctions of 1-D stochastic Hamiltonian systems via Riccati blow-up chains."""

__version__ = "0.1.0"
