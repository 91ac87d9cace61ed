"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here is parametrised by the complementary parameter
``m1 = 1 - k**2`` rather than by the modulus ``k``.  Internal layers of the
stationary profiles sharpen as ``k -> 1`` and ``m1`` then becomes
exponentially small; storing ``k`` would round ``m1`` to zero long before the
physics degenerates.

K and E use the arithmetic-geometric mean; sn/cn/dn use the descending
Landen (Gauss) transformation with range reduction on the 4K period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Modulus",
    "ellip_K",
    "ellip_E",
    "ellip_KE",
    "jacobi_sncndn",
    "jacobi_sn",
    "jacobi_cn",
    "jacobi_dn",
]

_AGM_MAX_ITER = 40
_LANDEN_STOP_K2 = 1e-16
_LANDEN_MAX_DEPTH = 64


@dataclass(frozen=True)
class Modulus:
    """Elliptic modulus held through its complementary parameter ``m1 = 1 - k^2``."""

    m1: float

    def __post_init__(self) -> None:
        m1 = float(self.m1)
        if not (math.isfinite(m1) and 0.0 < m1 <= 1.0):
            raise ValueError(f"complementary parameter must satisfy 0 < m1 <= 1, got {self.m1!r}")
        object.__setattr__(self, "m1", m1)

    @classmethod
    def from_k(cls, k: float) -> "Modulus":
        if not 0.0 <= k < 1.0:
            raise ValueError(f"modulus must satisfy 0 <= k < 1, got {k!r}")
        # (1-k)(1+k) keeps the relative accuracy of m1 when k is near 1
        return cls((1.0 - k) * (1.0 + k))

    @property
    def k2(self) -> float:
        return 1.0 - self.m1

    @property
    def k(self) -> float:
        return math.sqrt(1.0 - self.m1)

    @property
    def kprime(self) -> float:
        return math.sqrt(self.m1)


def _agm_converged(a: float, b: float) -> bool:
    return abs(a - b) <= 4.0 * math.ulp(a)


def ellip_KE(m: Modulus) -> tuple[float, float]:
    """Return ``(K(k), E(k))`` from one AGM sweep on ``(1, sqrt(m1))``.

    E uses the Gauss sum ``E = K * (1 - sum 2^(j-1) c_j^2)`` with the
    ``j = 0`` term ``k^2/2`` folded in as ``(1 + m1)/2`` so that ``k`` itself
    is never formed.
    """
    a = 1.0
    b = math.sqrt(m.m1)
    # 1 - k^2/2, exact in terms of m1
    acc = 0.5 * (1.0 + m.m1)
    weight = 0.5
    for _ in range(_AGM_MAX_ITER):
        if _agm_converged(a, b):
            break
        a_next = 0.5 * (a + b)
        # cancellation in a - b only hits terms already below rounding of acc
        c = 0.5 * (a - b)
        b = math.sqrt(a * b)
        a = a_next
        weight *= 2.0
        acc -= weight * c * c
    else:  # pragma: no cover - quadratic convergence makes this unreachable
        raise RuntimeError("AGM failed to converge")
    K = math.pi / (2.0 * a)
    return K, K * acc


def ellip_K(m: Modulus) -> float:
    """Complete elliptic integral of the first kind."""
    a, b = 1.0, math.sqrt(m.m1)
    for _ in range(_AGM_MAX_ITER):
        if _agm_converged(a, b):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def ellip_E(m: Modulus) -> float:
    """Complete elliptic integral of the second kind."""
    return ellip_KE(m)[1]


def _landen_chain(m1: float) -> list[float]:
    """Moduli k_1, k_2, ... of the descending Landen sequence starting at m1.

    Each step maps ``m1 -> 4 sqrt(m1) / (1 + sqrt(m1))^2`` and the new modulus
    is ``k = (1 - sqrt(m1)) / (1 + sqrt(m1)) = (1 - m1)/(1 + sqrt(m1))^2``,
    both free of cancellation.  Stops once ``k^2 < 1e-16``.
    """
    ks: list[float] = []
    k2 = 1.0 - m1
    depth = 0
    while k2 >= _LANDEN_STOP_K2:
        s = math.sqrt(m1)
        d = (1.0 + s) ** 2
        k = (1.0 - m1) / d
        m1 = 4.0 * s / d
        k2 = k * k
        ks.append(k)
        depth += 1
        if depth > _LANDEN_MAX_DEPTH:  # pragma: no cover
            raise RuntimeError("Landen descent did not terminate")
    return ks


def jacobi_sncndn(x, m: Modulus):
    """Jacobi ``sn, cn, dn`` at ``x`` (scalar or array) for modulus ``m``.

    The argument is first reduced to ``[-K, K]`` using
    ``sn(x + 2K) = -sn(x)``, ``cn(x + 2K) = -cn(x)`` and the reflection
    ``x -> 2K - x`` (which flips ``cn`` only); ``dn`` is even and 2K-periodic.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)

    K = ellip_K(m)
    # reduce to [-2K, 2K)
    r = xa - 4.0 * K * np.floor((xa + 2.0 * K) / (4.0 * K))
    sign_sc = np.ones_like(r)
    # shift by 2K into [-K, K]: sn, cn flip sign
    hi = r > K
    lo = r < -K
    r = np.where(hi, r - 2.0 * K, np.where(lo, r + 2.0 * K, r))
    sign_sc = np.where(hi | lo, -1.0, 1.0)

    ks = _landen_chain(m.m1)
    # scale the argument down the chain: v_{j+1} = v_j / (1 + k_{j+1})
    v = r.copy()
    for k in ks:
        v = v / (1.0 + k)
    sn = np.sin(v)
    cn = np.cos(v)
    dn = np.ones_like(v)
    for k in reversed(ks):
        s2 = sn * sn
        denom = 1.0 + k * s2
        sn_new = (1.0 + k) * sn / denom
        cn = cn * dn / denom
        dn = (1.0 - k * s2) / denom
        sn = sn_new

    sn = sign_sc * sn
    cn = sign_sc * cn
    # dn recomputed from sn: both terms nonnegative, so no cancellation as k -> 1
    dn = np.sqrt(np.maximum(cn * cn + m.m1 * sn * sn, 0.0))
    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn, cn, dn


def jacobi_sn(x, m: Modulus):
    return jacobi_sncndn(x, m)[0]


def jacobi_cn(x, m: Modulus):
    return jacobi_sncndn(x, m)[1]


def jacobi_dn(x, m: Modulus):
    return jacobi_sncndn(x, m)[2]
