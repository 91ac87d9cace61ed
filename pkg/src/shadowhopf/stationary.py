"""Exact internal n-layer stationary solutions of the shadow system.

The profile is

    u(x) = sign * rho * sn((2 n x + 1) K(k), k),   rho = sqrt(2 k^2 / (1 + k^2)),

with ``k`` fixed by ``sqrt(1 + k^2) K(k) = 1 / (2 n eps)``.  The modulus
depends on ``n`` and ``eps`` only through the product ``n * eps``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .elliptic import Modulus, ellip_K, ellip_KE, jacobi_sn, jacobi_sncndn

__all__ = [
    "DomainError",
    "Params",
    "StationaryProfile",
    "solve_modulus",
    "build_profile",
    "mass_squared",
    "one_minus_mass2",
    "chi",
    "one_minus_rho2",
]

_BISECT_MAX_ITER = 200


class DomainError(ValueError):
    """Parameters outside the region where an n-layer profile exists."""


@dataclass(frozen=True)
class Params:
    eps: float
    tau: float
    alpha: float = 0.5
    beta: float = 0.5
    gamma: float = 0.5

    def __post_init__(self) -> None:
        for name in ("eps", "tau", "alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def delta(self) -> float:
        return self.alpha * self.beta / self.gamma

    def with_tau(self, tau: float) -> "Params":
        return Params(self.eps, tau, self.alpha, self.beta, self.gamma)


def _modulus_lhs(m1: float) -> float:
    # sqrt(1 + k^2) K(k) written in m1
    return math.sqrt(2.0 - m1) * ellip_K(Modulus(m1))


def solve_modulus(eps: float, n: int) -> Modulus:
    """Solve ``sqrt(1+k^2) K(k) = 1/(2 n eps)`` for the complementary parameter.

    The left side is strictly decreasing in ``m1`` on ``(0, 1]`` with value
    ``pi/2`` at ``m1 = 1``, so a solution exists iff ``eps < 1/(n pi)``.
    Bisection runs geometrically while the bracket spans orders of magnitude
    and arithmetically after that, so tiny ``m1`` keep full relative accuracy.
    """
    if n < 1 or int(n) != n:
        raise DomainError(f"layer count must be a positive integer, got {n!r}")
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"eps must be positive, got {eps!r}")
    if eps * n * math.pi >= 1.0:
        raise DomainError(f"no {n}-layer solution: eps={eps!r} must be < 1/(n*pi)={1.0 / (n * math.pi)!r}")
    target = 1.0 / (2.0 * n * eps)

    lo = sys.float_info.min
    hi = 1.0
    if _modulus_lhs(lo) < target:
        raise DomainError(f"n*eps={n * eps!r} too small: 1 - k^2 underflows double precision")

    for _ in range(_BISECT_MAX_ITER):
        mid = math.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if _modulus_lhs(mid) > target:
            lo = mid
        else:
            hi = mid
    # pick the better bracket end
    m1 = lo if abs(_modulus_lhs(lo) - target) <= abs(_modulus_lhs(hi) - target) else hi
    return Modulus(m1)


def one_minus_rho2(m: Modulus) -> float:
    """``1 - rho^2 = (1 - k^2)/(1 + k^2)``, formed from m1 directly."""
    return m.m1 / (2.0 - m.m1)


@dataclass(frozen=True)
class StationaryProfile:
    n: int
    sign: int
    eps: float
    modulus: Modulus
    K: float
    E: float
    rho: float
    mass2: float
    layers: tuple[float, ...] = field(default=())

    def __call__(self, x):
        """Evaluate ``u_n^{sign}(x)`` on scalar or array ``x`` in ``[0, 1]``."""
        xa = np.asarray(x, dtype=float)
        return self.sign * self.rho * jacobi_sn((2.0 * self.n * xa + 1.0) * self.K, self.modulus)

    def derivative(self, x):
        """``u'(x)`` from ``d/dz sn = cn dn``."""
        xa = np.asarray(x, dtype=float)
        _, cn, dn = jacobi_sncndn((2.0 * self.n * xa + 1.0) * self.K, self.modulus)
        return self.sign * self.rho * 2.0 * self.n * self.K * np.asarray(cn) * np.asarray(dn)

    @property
    def q(self) -> float:
        return one_minus_rho2(self.modulus)

    @property
    def value_at_zero(self) -> float:
        return self.sign * self.rho


def build_profile(eps: float, n: int, sign: int = -1) -> StationaryProfile:
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    m = solve_modulus(eps, n)
    K, E = ellip_KE(m)
    k2 = m.k2
    rho = math.sqrt(2.0 * k2 / (2.0 - m.m1))
    layers = tuple((1.0 + 2.0 * l) / (2.0 * n) for l in range(n))
    return StationaryProfile(
        n=int(n),
        sign=sign,
        eps=float(eps),
        modulus=m,
        K=K,
        E=E,
        rho=rho,
        mass2=_mass2(m.m1, K, E),
        layers=layers,
    )


def _mass2(m1: float, K: float, E: float) -> float:
    return 2.0 / (2.0 - m1) * (1.0 - E / K)


def mass_squared(p: StationaryProfile) -> float:
    """``int_0^1 u^2 dx = (2/(1+k^2)) (1 - E/K)``; independent of the sign."""
    return _mass2(p.modulus.m1, p.K, p.E)


def one_minus_mass2(p: StationaryProfile) -> float:
    """``1 - int u^2 = (2E/K - m1)/(1 + k^2)`` without the subtraction from 1."""
    m1 = p.modulus.m1
    return (2.0 * p.E / p.K - m1) / (2.0 - m1)


def chi(p: StationaryProfile) -> float:
    """Threshold ``chi_n``; the Hopf analysis requires ``chi_n < delta``."""
    m1 = p.modulus.m1
    return m1 * m1 * p.K / ((2.0 - m1) * (2.0 * p.E - m1 * p.K))
