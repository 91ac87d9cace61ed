"""Hopf bifurcation of internal-layer solutions in a shadow reaction-diffusion system.

Modules: ``elliptic`` (complete integrals and Jacobi functions), ``stationary`` (n-layer profiles),
``spectrum`` (critical tau and eigenvalue tracking), ``simulate``
(time stepping), ``analyze`` (periods and layer motion), ``oracle``
(brute-force cross-checks) and ``cli``.
"""

from .stationary import DomainError, Params, StationaryProfile, build_profile
from .spectrum import HopfData, hopf_point

__version__ = "0.1.0"

__all__ = ["DomainError", "Params", "StationaryProfile", "build_profile", "HopfData", "hopf_point", "__version__"]
