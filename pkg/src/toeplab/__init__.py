"""Numerical laboratory for the top eigenvalue of random symmetric
Toeplitz matrices: the circulant spectral identity, projection kernels,
block reduction, the autocorrelation and finite-section variational
problems behind the limit constant, and a third-order swapping bound."""

__version__ = "0.1.0"
