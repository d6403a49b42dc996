"""Wigner limits of lattice sums and Epstein zeta functions."""
