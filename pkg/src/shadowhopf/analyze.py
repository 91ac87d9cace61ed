"""Period and layer-motion diagnostics for simulated trajectories."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "ANTIPHASE_THRESHOLD",
    "TooFewCyclesError",
    "InsufficientDataError",
    "PeriodEstimate",
    "AnalysisSummary",
    "extract_periods",
    "relative_error_series",
    "zero_crossings",
    "layer_positions",
    "antiphase_score",
    "predicted_layers",
    "oscillation_amplitude",
    "write_analysis_csv",
]

ANTIPHASE_THRESHOLD = -0.5


class TooFewCyclesError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodEstimate:
    first_period: float
    periods: np.ndarray
    peak_times: np.ndarray
    method: str = "peak-to-peak, detrended, parabolic refinement"

    def __post_init__(self) -> None:
        if self.periods.size == 0 or np.any(self.periods <= 0):
            raise ValueError("periods must be a nonempty positive series")


@dataclass
class AnalysisSummary:
    first_period: float
    exact_period: float
    first_relative_error_pct: float
    antiphase_score: float | None = None
    relative_errors_pct: list[float] = field(default_factory=list)

    @property
    def antiphase(self) -> bool | None:
        if self.antiphase_score is None:
            return None
        return self.antiphase_score < ANTIPHASE_THRESHOLD


# ---------------------------------------------------------------- periods


def _moving_average(y: np.ndarray, half: int) -> tuple[np.ndarray, np.ndarray]:
    """Centred mean over ``2*half+1`` samples and the half-width actually used.

    Near the ends the window shrinks symmetrically, so the average never
    picks up a phase shift from a lopsided window.
    """
    c = np.concatenate(([0.0], np.cumsum(y)))
    idx = np.arange(y.size)
    h = np.minimum(np.minimum(idx, y.size - 1 - idx), half)
    return (c[idx + h + 1] - c[idx - h]) / (2 * h + 1), h


def _upward_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    k = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    return t[k] - y[k] * (t[k + 1] - t[k]) / (y[k + 1] - y[k])


def _coarse_period(t: np.ndarray, y: np.ndarray) -> float:
    ups = _upward_crossings(t, y - y.mean())
    if ups.size < 2:
        raise TooFewCyclesError("fewer than two upward mean crossings")
    return float(np.median(np.diff(ups)))


def extract_periods(t, y, skip: float = 0.0) -> PeriodEstimate:
    """Peak-to-peak periods of a nearly periodic, possibly drifting signal.

    The signal after ``skip`` is detrended by a centred moving average whose
    window is 1.5 times a coarse period taken from mean crossings.  Each
    positive lobe of the detrended signal contributes its highest sample,
    refined by a parabola through the neighbours.  Maxima so close to either
    end that not even one coarse period fits around them are dropped.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-d arrays of equal length")
    keep = t >= skip
    t, y = t[keep], y[keep]
    if t.size < 5 or not np.all(np.isfinite(y)) or np.ptp(y) == 0.0:
        raise TooFewCyclesError("series is too short, non-finite or constant")
    dt = float(np.median(np.diff(t)))

    guess = _coarse_period(t, y)
    half = max(1, int(round(0.75 * guess / dt)))
    trend, used = _moving_average(y, half)
    # A centred mean over 2h+1 samples scales a sinusoid at the coarse
    # frequency by g(h); undo the factor so that the shrinking edge windows
    # do not tilt the lobes and drag the maxima sideways.
    w = 2.0 * np.pi * dt / guess
    span = 2 * used + 1
    gain = np.sin(0.5 * span * w) / (span * np.sin(0.5 * w))
    trusted = used >= int(round(0.5 * guess / dt))
    z = (y - trend) / np.where(trusted, 1.0 - gain, 1.0)

    up = np.nonzero((z[:-1] < 0) & (z[1:] >= 0))[0] + 1
    down = np.nonzero((z[:-1] >= 0) & (z[1:] < 0))[0] + 1
    peaks = []
    for a in up:
        ends = down[down > a]
        if ends.size == 0:
            break
        b = ends[0]
        j = a + int(np.argmax(z[a:b]))
        if j == 0 or j == z.size - 1 or not trusted[j]:
            continue
        y0, y1, y2 = z[j - 1], z[j], z[j + 1]
        curv = y0 - 2.0 * y1 + y2
        off = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
        peaks.append(t[j] + off * (t[j + 1] - t[j - 1]) / 2.0)
    if len(peaks) < 2:
        raise TooFewCyclesError(f"found {len(peaks)} maxima after t={skip}; need at least 2")
    peaks = np.array(peaks)
    periods = np.diff(peaks)
    return PeriodEstimate(float(periods[0]), periods, peaks)


def relative_error_series(estimate: PeriodEstimate, exact_period: float) -> np.ndarray:
    """``100 (1 - period_i / exact)`` per cycle."""
    if not exact_period > 0:
        raise ValueError("exact period must be positive")
    return 100.0 * (1.0 - estimate.periods / exact_period)


def oscillation_amplitude(t, y, at: float, period: float, baseline: float = 0.0) -> float:
    """Largest ``|y - baseline|`` over the trailing window ``[at - period, at]``.

    ``baseline`` is the value of the steady state being tested (0 for the
    mean of ``u_1^-``), so a solution that leaves the steady state for good
    also registers as a large amplitude.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= at - period) & (t <= at)
    if not np.any(sel):
        raise InsufficientDataError(f"no samples near t={at}")
    return float(np.max(np.abs(y[sel] - baseline)))


# ---------------------------------------------------------------- layers


def zero_crossings(u, x) -> np.ndarray:
    """Abscissae where the samples change sign, by linear interpolation."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    s = np.signbit(u)
    k = np.nonzero(s[:-1] != s[1:])[0]
    du = u[k + 1] - u[k]
    frac = np.where(du != 0, -u[k] / np.where(du != 0, du, 1.0), 0.0)
    return x[k] + frac * (x[k + 1] - x[k])


def _match(found: np.ndarray, reference: np.ndarray) -> np.ndarray:
    out = np.full(reference.size, np.nan)
    if found.size == 0:
        return out
    dist = np.abs(found[:, None] - reference[None, :])
    used_f: set[int] = set()
    used_r: set[int] = set()
    for flat in np.argsort(dist, axis=None):
        i, j = divmod(int(flat), reference.size)
        if i in used_f or j in used_r:
            continue
        out[j] = found[i]
        used_f.add(i)
        used_r.add(j)
        if len(used_r) == reference.size or len(used_f) == found.size:
            break
    return out


def layer_positions(u, x, expected: int | Sequence[float] | None = None) -> np.ndarray:
    """Layer abscissae of sampled ``u``.

    Without ``expected`` all sign changes are returned.  An integer ``m``
    matches them to the stationary positions ``(1 + 2l)/(2m)``; a sequence is
    used as the reference positions directly.  Layers without a partner come
    back as NaN.
    """
    found = zero_crossings(u, x)
    if expected is None:
        return found
    if isinstance(expected, (int, np.integer)):
        m = int(expected)
        reference = (1.0 + 2.0 * np.arange(m)) / (2.0 * m) if m > 0 else np.empty(0)
    else:
        reference = np.asarray(expected, dtype=float)
    return _match(found, reference)


def antiphase_score(l0, l1, t=None, window: tuple[float, float] | None = None) -> float:
    """Pearson correlation of two layer displacement series.

    Values below ``ANTIPHASE_THRESHOLD`` are read as anti-phase motion.
    """
    a = np.asarray(l0, dtype=float)
    b = np.asarray(l1, dtype=float)
    if a.shape != b.shape:
        raise ValueError("layer series must have equal length")
    mask = np.isfinite(a) & np.isfinite(b)
    if window is not None:
        if t is None:
            raise ValueError("window needs the time axis")
        tt = np.asarray(t, dtype=float)
        mask &= (tt >= window[0]) & (tt <= window[1])
    a, b = a[mask], b[mask]
    if a.size < 3:
        raise InsufficientDataError("need at least 3 common samples")
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if den == 0.0:
        raise InsufficientDataError("a layer series has no variation")
    return float(np.dot(a, b) / den)


def predicted_layers(n: int, eps: float, lambda_In: float, r: float, t, sign: int = -1) -> np.ndarray:
    """Leading-order layer positions near the Hopf point, shape ``(..., n)``.

    Layer ``l`` sits at ``(1 + 2l)/(2n)`` and is displaced by
    ``3 sqrt(2) eps r sin(lambda t)`` with alternating direction.  ``sign``
    selects ``u^+`` or ``u^-``.
    """
    t = np.asarray(t, dtype=float)
    base = (1.0 + 2.0 * np.arange(n)) / (2.0 * n)
    alt = np.where(np.arange(n) % 2 == 0, -1.0, 1.0) * sign
    disp = 3.0 * math.sqrt(2.0) * eps * r * np.sin(lambda_In * t)
    return base + alt * disp[..., None]


def write_analysis_csv(path, estimate: PeriodEstimate, exact_period: float) -> None:
    rel = relative_error_series(estimate, exact_period)
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cycle", "period", "relative_error_pct"])
        for i, (p, e) in enumerate(zip(estimate.periods, rel)):
            w.writerow([i, repr(float(p)), repr(float(e))])
