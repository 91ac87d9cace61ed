"""Brute-force cross-checks for the closed-form spectral results.

A second-order finite-difference discretisation of ``L = eps^2 d_xx + f'(u)``
with ghost-node Neumann closure is applied matrix-free.  Power iteration and
resolvent residuals run on top of it; an adaptive Simpson rule checks the
closed-form integrals.  Nothing in here is used
by the production code paths; the tests pit it against the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .stationary import Params, StationaryProfile

__all__ = [
    "ConvergenceError",
    "QuadratureError",
    "DiscreteOperator",
    "EigenEstimate",
    "laplacian_operator",
    "profile_operator",
    "dominant_eig",
    "resolvent_residual",
    "quadrature",
    "discrete_h",
    "discrete_pair",
]


class ConvergenceError(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteOperator:
    """``v -> eps^2 D2 v + c * v`` on ``size`` equispaced nodes of ``[0, 1]``.

    ``D2`` is the three-point second difference; the end rows use the ghost
    value ``v[-1] = v[1]`` and therefore carry a 2 on the off-diagonal.
    """

    size: int
    eps: float
    coeff: np.ndarray

    def __post_init__(self) -> None:
        if self.size < 3:
            raise ValueError("need at least 3 nodes")
        c = np.asarray(self.coeff, dtype=float)
        if c.shape != (self.size,):
            raise ValueError(f"coefficient must have shape ({self.size},)")
        object.__setattr__(self, "coeff", c)

    @property
    def dx(self) -> float:
        return 1.0 / (self.size - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.size)

    def action(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        d2 = np.empty_like(v)
        d2[1:-1] = v[:-2] - 2.0 * v[1:-1] + v[2:]
        d2[0] = 2.0 * (v[1] - v[0])
        d2[-1] = 2.0 * (v[-2] - v[-1])
        return (self.eps / self.dx) ** 2 * d2 + self.coeff * v

    __call__ = action

    def banded(self, shift: complex = 0.0) -> np.ndarray:
        """``L - shift`` in the (1, 1) banded layout used by ``solve_banded``."""
        r = (self.eps / self.dx) ** 2
        dtype = complex if isinstance(shift, complex) else float
        ab = np.zeros((3, self.size), dtype=dtype)
        ab[0, 1:] = r
        ab[0, 1] = 2.0 * r
        ab[1] = -2.0 * r + self.coeff - shift
        ab[2, :-1] = r
        ab[2, -2] = 2.0 * r
        return ab

    def solve(self, rhs: np.ndarray, shift: complex = 0.0) -> np.ndarray:
        """Solve ``(L - shift) v = rhs``."""
        return solve_banded((1, 1), self.banded(shift), rhs)

    def norm_bound(self) -> float:
        """Gershgorin bound on ``|L|`` in the max norm."""
        return 4.0 * (self.eps / self.dx) ** 2 + float(np.max(np.abs(self.coeff)))

    def weights(self) -> np.ndarray:
        """Trapezoid weights; ``diag(w) L`` is symmetric."""
        w = np.full(self.size, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


def laplacian_operator(size: int, eps: float = 1.0) -> DiscreteOperator:
    return DiscreteOperator(size, eps, np.zeros(size))


def profile_operator(p: StationaryProfile, size: int) -> DiscreteOperator:
    """Linearisation about ``p``: ``f'(u) = 1 - 3 u^2``."""
    x = np.linspace(0.0, 1.0, size)
    u = np.asarray(p(x))
    return DiscreteOperator(size, p.eps, 1.0 - 3.0 * u * u)


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int


def dominant_eig(
    op: DiscreteOperator,
    shift: float = 0.0,
    *,
    invert: bool = False,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    seed: int = 0,
) -> EigenEstimate:
    """Power iteration for an extreme real eigenvalue of ``op``.

    With ``invert=False`` this iterates ``L + shift`` and returns the
    eigenvalue of ``L`` of largest ``|mu + shift|``.  With ``invert=True`` it
    iterates ``(L - shift)^{-1}`` and returns the eigenvalue closest to
    ``shift``; on fine grids this is the only practical route because the
    spread of the diffusion spectrum makes the plain ratio close to 1.
    Convergence is judged by the Rayleigh residual ``|L v - mu v|`` for unit
    ``v``, relative to a norm bound of the operator.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.size)
    v /= np.linalg.norm(v)
    w = op.weights()
    mu = 0.0
    res = math.inf
    scale = op.norm_bound()
    for it in range(1, max_iter + 1):
        y = op.solve(v, shift) if invert else op.action(v) + shift * v
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return EigenEstimate(-shift if not invert else shift, v, 0.0, it)
        v = y / nrm
        Lv = op.action(v)
        # weighted Rayleigh quotient: diag(w) L is symmetric
        mu = float(np.dot(w * v, Lv) / np.dot(w * v, v))
        res = float(np.linalg.norm(Lv - mu * v))
        if res <= tol * scale:
            return EigenEstimate(mu, v, res, it)
    raise ConvergenceError(f"power iteration stalled: residual {res:.3e} after {max_iter} iterations")


def resolvent_residual(op: DiscreteOperator, lam: complex, phi) -> float:
    """``max |(L_h - lam) phi - 1|`` over the nodes; ``phi`` is a callable or samples."""
    vals = phi(op.x) if callable(phi) else phi
    vals = np.asarray(vals, dtype=complex)
    return float(np.max(np.abs(op.action(vals) - lam * vals - 1.0)))


_ULP = np.finfo(float).eps


def _simpson_panel(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def quadrature(f, a: float = 0.0, b: float = 1.0, *, tol: float = 1e-12, max_depth: int = 50) -> float:
    """Integral of ``f`` over ``[a, b]``.

    Callables get adaptive Simpson with Richardson correction; sampled values
    (assumed equispaced over ``[a, b]``) get composite Simpson.
    """
    if not callable(f):
        y = np.asarray(f, dtype=float)
        if y.size < 3:
            raise QuadratureError("need at least 3 samples")
        return float(simpson(y, x=np.linspace(a, b, y.size)))

    g: Callable[[float], float] = lambda t: float(f(t))
    fa, fb, fm = g(a), g(b), g(0.5 * (a + b))
    whole = _simpson_panel(fa, fm, fb, b - a)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl, fr = g(0.5 * (lo + mid)), g(0.5 * (mid + hi))
        left = _simpson_panel(flo, fl, fmid, mid - lo)
        right = _simpson_panel(fmid, fr, fhi, hi - mid)
        err = left + right - s
        # below a few ulps of the panel the error estimate is rounding noise
        target = max(15.0 * eps, 64.0 * _ULP * (abs(left) + abs(right)))
        if abs(err) <= target or depth >= max_depth:
            if abs(err) > target:
                raise QuadratureError(f"tolerance {tol:g} not met on [{lo!r}, {hi!r}]")
            total += left + right + err / 15.0
            continue
        stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps, depth + 1))
        stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps, depth + 1))
    return total


# ------------------------------------------------------------ nonlocal block


def discrete_h(op: DiscreteOperator, params: Params, lam: complex) -> complex:
    """Scalar reduction of the discretised nonlocal problem.

    Zeros of this function are exactly the eigenvalues of the
    ``(N+1) x (N+1)`` block ``[[L_h, -alpha 1], [beta w^T / tau, -gamma / tau]]``.
    """
    lam = complex(lam)
    phi = op.solve(np.ones(op.size, dtype=complex), lam)
    inner = np.dot(op.weights(), phi)
    return 1.0 - params.alpha * params.beta / (params.tau * lam + params.gamma) * inner


def discrete_pair(op: DiscreteOperator, params: Params, guess: complex, *, tol: float = 1e-13, max_iter: int = 60) -> complex:
    """Secant iteration on ``discrete_h`` from a nearby starting value."""
    z0 = complex(guess)
    z1 = z0 * (1.0 + 1e-6) + 1e-8j
    f0, f1 = discrete_h(op, params, z0), discrete_h(op, params, z1)
    for _ in range(max_iter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1, f1 = z2, discrete_h(op, params, z2)
        if abs(z1 - z0) <= tol * max(1.0, abs(z1)):
            return z1
    if abs(f1) < 1e-10:
        return z1
    raise ConvergenceError(f"secant iteration did not converge from {guess!r}")
