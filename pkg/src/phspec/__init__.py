"""phspec: spectra of random matrices hermitian under an indefinite metric.

The package samples phi = A * B (A a random hermitian matrix, B a fixed
invertible metric), solves the associated large-N self-consistency
equations for the averaged resolvent, and cross-validates the Monte
Carlo spectra against closed-form densities and phase boundaries.
"""

from . import ensemble, gapsolve, hermcheck, metric, spectral, theory

__all__ = ["ensemble", "gapsolve", "hermcheck", "metric", "spectral", "theory"]
__version__ = "0.1.0"
