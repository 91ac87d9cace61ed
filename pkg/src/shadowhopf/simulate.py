"""Time integration of the shadow system

    u_t = eps^2 u_xx + u - u^3 - alpha xi,    tau xi' = int_0^1 (beta u - gamma xi) dx,

on [0, 1] with Neumann boundaries.

Diffusion is backward Euler with a ghost-node Neumann closure; the reaction
term is explicit.  xi is updated explicitly from the pre-step u with
trapezoid quadrature.  The constant tridiagonal matrix is factorised once
per run and the inner loop is compiled with numba.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from . import analyze
from .stationary import DomainError, Params, build_profile

__all__ = [
    "BlowUpError",
    "Grid",
    "State",
    "Trajectory",
    "INITIAL_KINDS",
    "make_initial",
    "step",
    "run",
    "trapezoid_mean",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_snapshots_csv",
]

DEFAULT_NODES = 201
DEFAULT_DT = 0.01
MAX_DT = 0.1
DEFAULT_XI0 = 0.03
INITIAL_KINDS = ("perturbed-single-layer", "near-two-layer", "custom")
_BUMP_DEFAULTS = {
    "perturbed-single-layer": (0.3, 0.5, 0.1),
    "near-two-layer": (0.1, 0.5, 0.1),
}


class BlowUpError(RuntimeError):
    def __init__(self, t_last: float, message: str = "") -> None:
        self.t_last = t_last
        super().__init__(message or f"state became non-finite after t={t_last!r}")


@dataclass(frozen=True)
class Grid:
    nodes: int = DEFAULT_NODES

    def __post_init__(self) -> None:
        if int(self.nodes) != self.nodes or self.nodes < 3:
            raise DomainError(f"grid needs an integer node count >= 3, got {self.nodes!r}")

    @property
    def dx(self) -> float:
        return 1.0 / (self.nodes - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nodes)


@dataclass(frozen=True)
class State:
    u: np.ndarray
    xi: float
    t: float = 0.0

    def __post_init__(self) -> None:
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "t", float(self.t))


@dataclass
class Trajectory:
    times: np.ndarray
    mean_u: np.ndarray
    xi: np.ndarray
    layers: np.ndarray
    final: State
    snapshot_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    snapshots: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    x: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        n = self.times.size
        if not (self.mean_u.size == self.xi.size == self.layers.shape[0] == n):
            raise ValueError("trajectory series must have equal length")

    @property
    def layer_count(self) -> int:
        return self.layers.shape[1]


def trapezoid_mean(u: np.ndarray) -> float:
    """``int_0^1 u dx`` by the trapezoid rule on equispaced nodes."""
    u = np.asarray(u, dtype=float)
    return float((u.sum() - 0.5 * (u[0] + u[-1])) / (u.size - 1))


# ---------------------------------------------------------------- kernel


def _factorise(nodes: int, r: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thomas factors of ``I - r D2`` with the Neumann rows."""
    lower = np.full(nodes, -r)
    upper = np.full(nodes, -r)
    diag = np.full(nodes, 1.0 + 2.0 * r)
    upper[0] = -2.0 * r
    lower[-1] = -2.0 * r
    lower[0] = upper[-1] = 0.0
    cp = np.empty(nodes)
    denom = np.empty(nodes)
    denom[0] = diag[0]
    cp[0] = upper[0] / denom[0]
    for i in range(1, nodes):
        denom[i] = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom[i]
    return lower, cp, denom


@numba.njit(cache=True)
def _advance(u, xi, nsteps, dt, alpha, beta, gamma, tau, lower, cp, denom):  # pragma: no cover - compiled
    n = u.size
    inv = 1.0 / (n - 1)
    rhs = np.empty(n)
    for _ in range(nsteps):
        s = 0.5 * (u[0] + u[n - 1])
        for i in range(1, n - 1):
            s += u[i]
        mean = s * inv
        for i in range(n):
            v = u[i]
            rhs[i] = v + dt * (v - v * v * v - alpha * xi)
        # forward sweep
        u[0] = rhs[0] / denom[0]
        for i in range(1, n):
            u[i] = (rhs[i] - lower[i] * u[i - 1]) / denom[i]
        for i in range(n - 2, -1, -1):
            u[i] -= cp[i] * u[i + 1]
        xi = xi + dt / tau * (beta * mean - gamma * xi)
        if not (math.isfinite(xi) and math.isfinite(u[0]) and math.isfinite(u[n // 2])):
            return xi, False
    return xi, True


def _check_dt(dt: float, max_dt: float) -> None:
    if not (math.isfinite(dt) and 0.0 < dt <= max_dt):
        raise DomainError(f"dt must lie in (0, {max_dt}], got {dt!r}")


def step(state: State, params: Params, grid: Grid, dt: float = DEFAULT_DT, *, max_dt: float = MAX_DT) -> State:
    """Advance one time step."""
    _check_dt(dt, max_dt)
    if state.u.size != grid.nodes:
        raise DomainError("state and grid sizes differ")
    u = state.u.copy()
    fac = _factorise(grid.nodes, dt * params.eps**2 / grid.dx**2)
    xi, ok = _advance(u, state.xi, 1, dt, params.alpha, params.beta, params.gamma, params.tau, *fac)
    if not ok or not np.all(np.isfinite(u)):
        raise BlowUpError(state.t)
    return State(u, xi, state.t + dt)


def run(
    initial: State,
    params: Params,
    grid: Grid,
    dt: float = DEFAULT_DT,
    t_end: float = 100.0,
    record_every: int = 10,
    *,
    layers: int | None = None,
    snapshot_every: int = 0,
    max_dt: float = MAX_DT,
) -> Trajectory:
    """Integrate to ``t_end`` and record every ``record_every`` steps.

    ``layers`` fixes how many layers are tracked (default: sign changes of
    the initial state); each record matches the current sign changes to the
    last known positions.  ``snapshot_every`` > 0 stores full profiles at
    that multiple of the record stride.
    """
    _check_dt(dt, max_dt)
    if not (math.isfinite(t_end) and t_end > 0):
        raise DomainError(f"t_end must be positive, got {t_end!r}")
    if record_every < 1:
        raise DomainError("record_every must be >= 1")
    if initial.u.size != grid.nodes:
        raise DomainError("state and grid sizes differ")

    x = grid.x
    total = int(round(t_end / dt))
    if total < 1:
        raise DomainError("t_end is shorter than one time step")
    nrec = total // record_every + 1 + (1 if total % record_every else 0)
    fac = _factorise(grid.nodes, dt * params.eps**2 / grid.dx**2)

    u = np.array(initial.u, dtype=float)
    xi = initial.xi
    ref = analyze.zero_crossings(u, x)
    if layers is not None:
        ref = ref[:layers] if ref.size >= layers else np.concatenate([ref, (1.0 + 2.0 * np.arange(ref.size, layers)) / (2.0 * layers)])
    m = ref.size

    times = np.empty(nrec)
    mean_u = np.empty(nrec)
    xis = np.empty(nrec)
    lay = np.full((nrec, m), np.nan)
    snap_t, snaps = [], []

    def record(k: int, t: float) -> None:
        nonlocal ref
        times[k], mean_u[k], xis[k] = t, trapezoid_mean(u), xi
        if m:
            pos = analyze.layer_positions(u, x, ref)
            lay[k] = pos
            ref = np.where(np.isnan(pos), ref, pos)
        if snapshot_every and k % snapshot_every == 0:
            snap_t.append(t)
            snaps.append(u.copy())

    t0 = initial.t
    done = 0
    record(0, t0)
    k = 1
    while done < total:
        chunk = min(record_every, total - done)
        xi, ok = _advance(u, xi, chunk, dt, params.alpha, params.beta, params.gamma, params.tau, *fac)
        if not ok or not np.all(np.isfinite(u)):
            raise BlowUpError(t0 + done * dt)
        done += chunk
        record(k, t0 + done * dt)
        k += 1

    return Trajectory(
        times=times[:k],
        mean_u=mean_u[:k],
        xi=xis[:k],
        layers=lay[:k],
        final=State(u, xi, t0 + total * dt),
        snapshot_times=np.array(snap_t),
        snapshots=np.array(snaps) if snaps else np.empty((0, grid.nodes)),
        x=x,
    )


# ---------------------------------------------------------------- initial data


def make_initial(
    kind: str = "perturbed-single-layer",
    eps: float = 0.2,
    grid: Grid | None = None,
    *,
    height: float | None = None,
    center: float | None = None,
    width: float | None = None,
    xi0: float = DEFAULT_XI0,
    samples=None,
) -> State:
    """Initial data for the reproduction runs.

    ``perturbed-single-layer`` is ``u_1^-`` plus a Gaussian bump
    ``height * exp(-((x - center)/width)^2)``; ``near-two-layer`` is ``u_2^-``
    plus the same kind of bump (smaller by default); ``custom`` takes node
    values from ``samples``.
    """
    grid = grid or Grid()
    if kind == "custom":
        if samples is None:
            raise DomainError("custom initial data needs samples")
        u = np.asarray(samples, dtype=float)
        if u.shape != (grid.nodes,):
            raise DomainError(f"expected {grid.nodes} samples, got shape {u.shape}")
        return State(u, xi0)
    if kind not in _BUMP_DEFAULTS:
        raise DomainError(f"unknown initial-data kind {kind!r}; choose from {INITIAL_KINDS}")
    h0, c0, w0 = _BUMP_DEFAULTS[kind]
    h = h0 if height is None else height
    c = c0 if center is None else center
    w = w0 if width is None else width
    if not w > 0:
        raise DomainError("bump width must be positive")
    n = 1 if kind == "perturbed-single-layer" else 2
    x = grid.x
    u = np.asarray(build_profile(eps, n, -1)(x)) + h * np.exp(-(((x - c) / w) ** 2))
    return State(u, xi0)


# ---------------------------------------------------------------- CSV


def write_trajectory_csv(path, traj: Trajectory) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean_u", "xi"] + [f"layer_{i}" for i in range(traj.layer_count)])
        for i in range(traj.times.size):
            row = [repr(float(traj.times[i])), repr(float(traj.mean_u[i])), repr(float(traj.xi[i]))]
            row += ["" if math.isnan(v) else repr(float(v)) for v in traj.layers[i]]
            w.writerow(row)


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV; empty layer fields become NaN."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:3] != ["t", "mean_u", "xi"]:
        raise ValueError(f"{path}: not a trajectory file")
    header = rows[0]
    data = np.array([[float(v) if v != "" else np.nan for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_snapshots_csv(path, traj: Trajectory) -> None:
    """First row holds the x coordinates (prefixed by an empty time cell)."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + [repr(float(v)) for v in traj.x])
        for t, u in zip(traj.snapshot_times, traj.snapshots):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in u])
