"""Finite models of Theta_n, globular sets, and the free strict n-category monad."""
