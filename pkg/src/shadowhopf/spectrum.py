"""Spectral data of the linearisation around the n-layer stationary solution.

Complex eigenvalues of the nonlocal operator can only come from roots of the
cubic

    g(lam, tau) = (tau/gamma) lam^3 + (2 tau/gamma + 1) lam^2
                  + (delta + 2 - 3 (tau/gamma) q^2) lam + 3 delta s - 3 q^2,

with ``q = 1 - rho^2`` and ``s = 1 - int u^2``.  Eigenvalues are plain Python
``complex`` numbers throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .stationary import Params, StationaryProfile, build_profile, chi, one_minus_mass2

__all__ = [
    "SpectralPoint",
    "PoleError",
    "IllConditionedError",
    "NoComplexPairError",
    "NoCrossingError",
    "HopfData",
    "TransversalityData",
    "PairTrack",
    "StabilityVerdict",
    "mu_extremes",
    "mu_asymptotic",
    "cubic_coeffs",
    "cubic_eval",
    "cubic_roots",
    "complex_pair",
    "hopf_point",
    "hopf_asymptotics",
    "track_pair",
    "transversality",
    "resolvent_one",
    "h_function",
    "simplicity_margin",
    "classify_stability",
]

SpectralPoint = complex

_ROOT_RTOL = 1e-10
_NEWTON_STEPS = 4
_SQRT2 = math.sqrt(2.0)


class PoleError(ZeroDivisionError):
    """Evaluation requested at a pole of a resolvent expression."""


class IllConditionedError(ArithmeticError):
    """Root refinement did not reach the residual target."""


class NoComplexPairError(ValueError):
    pass


class NoCrossingError(ValueError):
    pass


# ---------------------------------------------------------------- scalar spectrum


def mu_extremes(p: StationaryProfile) -> tuple[float, float]:
    """Exact ``(mu_0, mu_n)``: roots of ``mu^2 + 2 mu - 3 q^2``."""
    q = p.q
    root = math.sqrt(1.0 + 3.0 * q * q)
    # mu_0 = -1 + root, written without cancellation
    return 3.0 * q * q / (1.0 + root), -1.0 - root


def mu_asymptotic(j: int, n: int, eps: float) -> float:
    """Leading-order small-eps value of the j-th eigenvalue of the scalar operator."""
    if j < 0:
        raise ValueError("eigenvalue index must be nonnegative")
    if j < n:
        return 96.0 * math.cos(j * math.pi / (2 * n)) ** 2 * math.exp(-_SQRT2 / (n * eps))
    if j < 2 * n:
        return -1.5 + 12.0 * math.cos((j - n) * math.pi / n) * math.exp(-1.0 / (_SQRT2 * n * eps))
    if j == 2 * n:
        return -2.0 - 96.0 * math.exp(-_SQRT2 / (n * eps))
    return -2.0 - (j - 2 * n) ** 2 * math.pi**2 * eps**2


# ---------------------------------------------------------------- the cubic


def cubic_coeffs(params: Params, p: StationaryProfile) -> tuple[float, float, float, float]:
    """``(c3, c2, c1, c0)`` of g(., tau) at ``params.tau``."""
    t = params.tau / params.gamma
    q2 = p.q**2
    d = params.delta
    return (t, 2.0 * t + 1.0, d + 2.0 - 3.0 * t * q2, 3.0 * d * one_minus_mass2(p) - 3.0 * q2)


def cubic_eval(coeffs, lam):
    c3, c2, c1, c0 = coeffs
    return ((c3 * lam + c2) * lam + c1) * lam + c0


def _quadratic_roots(a: float, b: float, c: float) -> tuple[complex, complex]:
    disc = b * b - 4.0 * a * c
    if disc >= 0:
        s = math.sqrt(disc)
        t = -0.5 * (b + math.copysign(s, b))
        r1 = t / a
        r2 = c / t if t != 0 else -r1
        return complex(max(r1, r2)), complex(min(r1, r2))
    z = complex(-b / (2.0 * a), math.sqrt(-disc) / (2.0 * abs(a)))
    return z, z.conjugate()


def _newton(coeffs, z, target):
    c3, c2, c1, _ = coeffs
    best, best_res = z, abs(cubic_eval(coeffs, z))
    for _ in range(_NEWTON_STEPS):
        if best_res <= 0.25 * target:
            break
        dg = (3.0 * c3 * z + 2.0 * c2) * z + c1
        if dg == 0:
            break
        z = z - cubic_eval(coeffs, z) / dg
        res = abs(cubic_eval(coeffs, z))
        if res < best_res:
            best, best_res = z, res
    return best, best_res


def _cubic_seeds(b: float, c: float, d: float) -> tuple[list[complex], bool]:
    """Closed-form roots of the monic cubic ``x^3 + b x^2 + c x + d``.

    The flag is true when the seeds are one real root plus a complex pair.
    """
    shift = b / 3.0
    p = c - b * b / 3.0
    qd = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (qd / 2.0) ** 2 + (p / 3.0) ** 3
    # p > 0 always means one real root; disc can underflow to 0 there
    if disc > 0 or p > 0:
        sd = math.sqrt(max(disc, 0.0))
        A = -math.copysign(abs(0.5 * qd) + sd, qd) if qd != 0 else sd
        A = math.copysign(abs(A) ** (1.0 / 3.0), A)
        B = -p / (3.0 * A) if A != 0 else 0.0
        return [
            complex(A + B - shift),
            complex(-0.5 * (A + B) - shift, 0.5 * math.sqrt(3.0) * abs(A - B)),
        ], True
    if p == 0.0:
        return [complex(-shift)] * 3, False
    mag = 2.0 * math.sqrt(-p / 3.0)
    arg = (3.0 * qd / (2.0 * p)) * math.sqrt(-3.0 / p)
    theta = math.acos(max(-1.0, min(1.0, arg)))
    return [complex(mag * math.cos(theta / 3.0 - 2.0 * math.pi * j / 3.0) - shift) for j in range(3)], False


def cubic_roots(coeffs, rtol: float = _ROOT_RTOL) -> tuple[complex, ...]:
    """All roots of a real cubic ``c3 x^3 + c2 x^2 + c1 x + c0``.

    Closed-form (Cardano / trigonometric) seeds, then complex Newton until the
    residual is below ``rtol * max(1, max|c_i|)``.  A nonreal pair is returned
    as ``(z, conj(z))`` with ``z.imag > 0``, after the real root.  Three real
    roots come back in decreasing order.  ``c3 == 0`` returns the two roots of
    the remaining quadratic.
    """
    c3, c2, c1, c0 = (float(c) for c in coeffs)
    scale = max(1.0, abs(c3), abs(c2), abs(c1), abs(c0))
    target = rtol * scale
    if c3 == 0.0:
        if c2 == 0.0:
            raise ValueError("degenerate polynomial: both leading coefficients vanish")
        return _quadratic_roots(c2, c1, c0)

    try:
        seeds, has_pair = _cubic_seeds(c2 / c3, c1 / c3, c0 / c3)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise IllConditionedError(f"closed-form stage failed: {exc}") from exc

    refined = []
    for z in seeds:
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise IllConditionedError("non-finite root estimate")
        try:
            z, res = _newton((c3, c2, c1, c0), z, target)
        except OverflowError as exc:
            raise IllConditionedError(str(exc)) from exc
        if not res <= target:
            raise IllConditionedError(f"cubic root residual {res:.3e} exceeds target {target:.3e}")
        refined.append(z)

    if has_pair:
        real = complex(refined[0].real, 0.0)
        z = complex(refined[1].real, abs(refined[1].imag))
        return real, z, z.conjugate()
    return tuple(sorted((complex(r.real, 0.0) for r in refined), key=lambda r: -r.real))


def complex_pair(roots) -> complex | None:
    """Upper-half-plane member of the nonreal pair, or None if all roots are real."""
    for r in roots:
        if r.imag > 0:
            return r
    return None


# ---------------------------------------------------------------- Hopf point


@dataclass(frozen=True)
class HopfData:
    n: int
    eps: float
    delta: float
    tau_n: float
    lambda_In: float
    period: float
    chi_n: float
    D: float
    valid: bool
    profile: StationaryProfile = field(repr=False, compare=False)


def hopf_point(params: Params, n: int, sign: int = -1) -> HopfData:
    """Exact critical time constant and frequency; ``params.tau`` is ignored.

    With ``A = 2(delta+2) - 3 delta s`` and ``r = sqrt(D) - A`` the closed
    forms are ``tau_n = 2 (delta+2) gamma / r`` and
    ``lambda^2 = r (6 delta s - r) / (8 (delta+2))``; ``r`` is formed as
    ``24 (delta+2) q^2 / (sqrt(D) + A)`` when ``A > 0`` since ``q`` is
    exponentially small for sharp layers.
    """
    prof = build_profile(params.eps, n, sign)
    d = params.delta
    q2 = prof.q**2
    s = one_minus_mass2(prof)
    c = chi(prof)
    A = 2.0 * (d + 2.0) - 3.0 * d * s
    D = A * A + 24.0 * (d + 2.0) * q2
    valid = c < d
    if not valid:
        nan = float("nan")
        return HopfData(n, params.eps, d, nan, nan, nan, c, D, False, prof)

    sqD = math.sqrt(D)
    r = 24.0 * (d + 2.0) * q2 / (sqD + A) if A > 0 else sqD - A
    tau_n = 2.0 * (d + 2.0) * params.gamma / r
    lam2 = r * (6.0 * d * s - r) / (8.0 * (d + 2.0))
    lam = math.sqrt(lam2)

    # second relation from the imaginary part of g(i lam, tau) = 0
    tau_check = (d + 2.0) * params.gamma / (lam2 + 3.0 * q2)
    if abs(tau_check - tau_n) > 1e-10 * tau_n:
        raise ArithmeticError(f"inconsistent Hopf data: {tau_n!r} vs {tau_check!r}")
    return HopfData(n, params.eps, d, tau_n, lam, 2.0 * math.pi / lam, c, D, True, prof)


def hopf_asymptotics(n: int, eps: float, params: Params) -> tuple[float, float, float]:
    """Small-eps leading terms ``(period, tau_n, chi_n)``."""
    if eps * n * math.pi >= 1.0:
        raise ValueError("eps must be < 1/(n pi)")
    d = params.delta
    x = _SQRT2 * n * eps
    period = math.pi / 12.0 * math.sqrt((d + 2.0) / d) * x**-0.5 * math.exp(1.0 / x)
    tau = params.gamma * (d + 2.0) / 192.0 * math.exp(_SQRT2 / (n * eps))
    chi_a = 16.0 * _SQRT2 / (n * eps) * math.exp(-_SQRT2 / (n * eps))
    return period, tau, chi_a


# ---------------------------------------------------------------- tracking


@dataclass(frozen=True)
class PairTrack:
    tau_star: float
    taus: np.ndarray
    pairs: np.ndarray


def _pair_at(params: Params, prof: StationaryProfile, tau: float) -> complex | None:
    return complex_pair(cubic_roots(cubic_coeffs(params.with_tau(tau), prof)))


def track_pair(params: Params, n: int, tau_lo: float, tau_hi: float, samples: int = 65, sign: int = -1) -> PairTrack:
    """Follow the complex pair over ``[tau_lo, tau_hi]`` and bisect on its real part."""
    if not 0 < tau_lo < tau_hi:
        raise ValueError("need 0 < tau_lo < tau_hi")
    prof = build_profile(params.eps, n, sign)
    taus = np.linspace(tau_lo, tau_hi, samples)
    pairs = []
    for t in taus:
        z = _pair_at(params, prof, float(t))
        if z is None:
            raise NoComplexPairError(f"no complex pair at tau={t!r}")
        pairs.append(z)
    pairs = np.array(pairs)
    re = pairs.real
    idx = np.nonzero(np.sign(re[:-1]) != np.sign(re[1:]))[0]
    if idx.size == 0:
        raise NoCrossingError("real part of the pair does not change sign on the bracket")
    lo, hi = float(taus[idx[0]]), float(taus[idx[0] + 1])
    f_lo = _pair_at(params, prof, lo).real
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        f_mid = _pair_at(params, prof, mid).real
        if f_mid == 0.0:
            lo = hi = mid
            break
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return PairTrack(0.5 * (lo + hi), taus, pairs)


@dataclass(frozen=True)
class TransversalityData:
    dRe_dtau: float
    dIm_dtau: float
    zeta_R: float
    zeta_I: float
    Delta: float


def transversality(params: Params, n: int, sign: int = -1) -> TransversalityData:
    """Speed of the pair at the crossing, ``d lambda / d tau = -g_tau / g_lam``.

    At ``(i L, tau_n)``: ``g_lam = a + 2 i (2 tau_n/gamma + 1) L`` with
    ``a = -2 tau_n L^2 / gamma = -2(delta+2) + 6 tau_n q^2 / gamma`` and
    ``-gamma g_tau = 2 L^2 + i L Z``, ``Z = L^2 + 3 q^2``.  Multiplying through
    by ``gamma conj(g_lam)`` gives ``(zeta_R + i zeta_I) / Delta``.
    """
    hd = hopf_point(params, n, sign)
    if not hd.valid:
        raise ValueError("transversality requires chi_n < delta")
    L = hd.lambda_In
    tau = hd.tau_n
    g = params.gamma
    q2 = hd.profile.q ** 2
    Z = L * L + 3.0 * q2
    a = -2.0 * tau * L * L / g
    c2 = 4.0 * tau / g + 2.0
    zeta_R = 2.0 * a * L * L + c2 * L * L * Z
    zeta_I = a * L * Z - 2.0 * c2 * L**3
    Delta = g * a * a + L * L * c2 * c2 * g
    return TransversalityData(zeta_R / Delta, zeta_I / Delta, zeta_R, zeta_I, Delta)


# ---------------------------------------------------------------- resolvent and h


def _resolvent_denominator(p: StationaryProfile, lam: complex) -> complex:
    lam = complex(lam)
    den = lam * lam + 2.0 * lam - 3.0 * p.q**2
    if abs(den) <= 1e-14 * max(1.0, abs(lam) ** 2):
        raise PoleError(f"lambda={lam!r} is at an eigenvalue mu_0 or mu_n of the scalar operator")
    return den


def resolvent_one(p: StationaryProfile, lam: complex):
    """Return ``x -> (L - lam)^{-1}[1](x)`` in closed form."""
    lam = complex(lam)
    den = _resolvent_denominator(p, lam)

    def phi(x):
        u = p(x)
        return (-(3.0 + lam) + 3.0 * u * u) / den

    return phi


def h_function(params: Params, p: StationaryProfile, lam: complex) -> complex:
    """Scalar reduction ``h(lam) = 1 - alpha beta / (tau lam + gamma) <(L - lam)^{-1} 1, 1>``."""
    lam = complex(lam)
    den = _resolvent_denominator(p, lam)
    tl = params.tau * lam + params.gamma
    if abs(tl) <= 1e-14 * max(params.gamma, abs(params.tau * lam)):
        raise PoleError(f"lambda={lam!r} equals -gamma/tau")
    inner = (-(3.0 + lam) + 3.0 * p.mass2) / den
    return 1.0 - params.alpha * params.beta / tl * inner


def simplicity_margin(params: Params, n: int, sign: int = -1) -> float:
    """Imaginary part of the nondegeneracy pairing at the Hopf point (positive means simple)."""
    hd = hopf_point(params, n, sign)
    if not hd.valid:
        raise ValueError("simplicity margin requires chi_n < delta")
    L = hd.lambda_In
    s = one_minus_mass2(hd.profile)
    return 6.0 * L * s + 4.0 * L * (params.delta + 2.0) * params.gamma / (params.alpha * params.beta)


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class StabilityVerdict:
    n: int
    tau: float
    tau_n: float
    verdict: str
    asymptotically_stable: bool
    valid: bool
    pair: complex | None
    positive_mu_asymptotic: tuple[float, ...] = ()


def classify_stability(params: Params, n: int, sign: int = -1) -> StabilityVerdict:
    """Stability of ``(u_n, 0)`` at ``params.tau``.

    Verdicts: ``stable`` / ``unstable`` for a single layer, ``metastable`` /
    ``hopf-unstable`` for n >= 2, ``critical`` exactly at ``tau_n`` and
    ``hypothesis-violated`` when ``chi_n >= delta``.
    """
    hd = hopf_point(params, n, sign)
    pos_mu = tuple(mu_asymptotic(j, n, params.eps) for j in range(1, n))
    if not hd.valid:
        return StabilityVerdict(n, params.tau, hd.tau_n, "hypothesis-violated", False, False, None, pos_mu)
    pair = _pair_at(params, hd.profile, params.tau)
    tau, tc = params.tau, hd.tau_n
    if n == 1:
        if tau < tc:
            verdict, stable = "stable", True
        elif tau > tc:
            verdict, stable = "unstable", False
        else:
            verdict, stable = "critical", False
    else:
        stable = False
        verdict = "metastable" if tau < tc else ("hopf-unstable" if tau > tc else "critical")
    return StabilityVerdict(n, tau, tc, verdict, stable, True, pair, pos_mu)
