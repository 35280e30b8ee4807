"""Numerical laboratory for resolvent statistics of Gaussian band random matrices.

Submodules:
  profiles    band variance profiles, Fourier transforms, small-p constants
  ensemble    seeded sampling of band and GOE matrices
  banded      complex-symmetric banded LDL^T and selected inversion kernels
  resolvent   resolvent diagonal, normalized trace, eigenvalues, counting law
  theory      closed-form predictions: semicircle transform, trace correlation
  montecarlo  replica estimators with jackknife errors and scaling fits
  experiments reproducible study drivers shared by the CLI and the test suite
  cli         experiment runner
"""

__version__ = "0.1.0"

from . import banded, ensemble, experiments, montecarlo, profiles, resolvent, theory  # noqa: E402,F401

