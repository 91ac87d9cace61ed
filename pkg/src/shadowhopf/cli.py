"""Command-line front end.

    shadowhopf exact --eps 0.2 --n 1
    shadowhopf simulate run.cfg
    shadowhopf analyze out/a1/trajectory.csv --eps 0.2 --n 1
    shadowhopf reproduce a1

Files land under ``$SHADOWHOPF_OUT`` (default ``./shadowhopf-out``), one
directory per preset or config.  Exit codes: 0 ok, 1 numerical failure or a
failed reproduction check, 2 parameter-domain or hypothesis violation,
64 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import analyze, simulate, spectrum
from .stationary import DomainError, Params, build_profile

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DOMAIN = 2
EXIT_USAGE = 64
OUT_ENV = "SHADOWHOPF_OUT"
SWEEP_EPS = (0.1, 0.08, 0.06, 0.05, 0.04)


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def output_root() -> Path:
    return Path(os.environ.get(OUT_ENV, "shadowhopf-out"))


# ---------------------------------------------------------------- config


class ConfigError(DomainError):
    def __init__(self, problems: list[str]) -> None:
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


@dataclass
class ExperimentConfig:
    """One simulation run.  Text form is ``key = value`` lines with ``#`` comments."""

    eps: float = 0.2
    tau: float = 6.0
    alpha: float = 0.5
    beta: float = 0.5
    gamma: float = 0.5
    n: int = 1
    nodes: int = simulate.DEFAULT_NODES
    dt: float = simulate.DEFAULT_DT
    t_end: float = 2600.0
    initial: str = "perturbed-single-layer"
    height: float = 0.3
    center: float = 0.5
    width: float = 0.1
    xi0: float = simulate.DEFAULT_XI0
    record_every: int = 10
    snapshot_every: int = 0
    output: str = ""

    def params(self) -> Params:
        return Params(self.eps, self.tau, self.alpha, self.beta, self.gamma)

    def validate(self) -> "ExperimentConfig":
        problems = []
        for name in ("eps", "tau", "alpha", "beta", "gamma", "width"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                problems.append(f"{name} must be positive and finite (got {v!r})")
        if self.n < 1:
            problems.append(f"n must be >= 1 (got {self.n})")
        elif self.eps > 0 and self.eps * self.n * math.pi >= 1:
            problems.append(f"eps*n*pi must be < 1 for an {self.n}-layer profile (got {self.eps * self.n * math.pi:.6g})")
        if self.nodes < 3:
            problems.append(f"nodes must be >= 3 (got {self.nodes})")
        if not (0 < self.dt <= simulate.MAX_DT):
            problems.append(f"dt must lie in (0, {simulate.MAX_DT}] (got {self.dt!r})")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            problems.append(f"t_end must be positive: empty run (got {self.t_end!r})")
        elif self.dt > 0 and self.t_end < self.dt:
            problems.append("t_end is shorter than one time step: empty run")
        if self.initial not in simulate.INITIAL_KINDS or self.initial == "custom":
            problems.append(f"initial must be perturbed-single-layer or near-two-layer (got {self.initial!r})")
        if self.record_every < 1:
            problems.append("record_every must be >= 1")
        if self.snapshot_every < 0:
            problems.append("snapshot_every must be >= 0")
        if problems:
            raise ConfigError(problems)
        return self

    def to_text(self) -> str:
        lines = ["# shadowhopf experiment configuration"]
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        types = {f.name: f.type for f in fields(cls)}
        values: dict[str, object] = {}
        problems = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = (s.strip() for s in line.partition("="))
            if not sep:
                problems.append(f"line {lineno}: expected 'key = value'")
            elif key not in types:
                problems.append(f"line {lineno}: unknown key {key!r}")
            else:
                try:
                    values[key] = {"float": float, "int": int}.get(types[key], str)(val)
                except ValueError:
                    problems.append(f"line {lineno}: bad value for {key}: {val!r}")
        if problems:
            raise ConfigError(problems)
        return cls(**values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())


# ---------------------------------------------------------------- presets


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class Preset:
    config: ExperimentConfig
    description: str
    checks: tuple[str, ...] = field(default_factory=tuple)


PRESETS: dict[str, Preset] = {
    "a1": Preset(
        ExperimentConfig(eps=0.2, tau=6.0, t_end=2600.0),
        "single layer below the critical tau: decaying oscillation",
        ("first_period", "first_error", "error_trend", "converges"),
    ),
    "b1": Preset(
        ExperimentConfig(eps=0.2, tau=6.7, t_end=300.0),
        "single layer above the critical tau: growing oscillation",
        ("amplitude_grows",),
    ),
    "c1": Preset(
        ExperimentConfig(eps=0.1, tau=6.0, n=2, t_end=1500.0, initial="near-two-layer", height=0.1),
        "two layers below the critical tau",
        ("antiphase",),
    ),
    "d1": Preset(
        ExperimentConfig(eps=0.1, tau=6.7, n=2, t_end=600.0, initial="near-two-layer", height=0.1),
        "two layers above the critical tau",
        ("antiphase", "constant_final"),
    ),
}
PRESETS["fig4"] = replace(PRESETS["a1"], checks=("first_period",))
PRESETS["fig5"] = replace(PRESETS["a1"], checks=("first_error", "error_trend"))
PRESET_NAMES = tuple(PRESETS) + ("sweep",)

ANTIPHASE_WINDOW = (0.0, 200.0)
B1_TIMES = (50.0, 300.0)


@dataclass
class RunResult:
    config: ExperimentConfig
    trajectory: simulate.Trajectory
    exact_period: float
    estimate: analyze.PeriodEstimate | None
    summary: analyze.AnalysisSummary | None
    elapsed: float


def execute(cfg: ExperimentConfig) -> RunResult:
    """Run a validated config and analyse the mean_u series."""
    cfg.validate()
    params = cfg.params()
    grid = simulate.Grid(cfg.nodes)
    init = simulate.make_initial(
        cfg.initial, cfg.eps, grid, height=cfg.height, center=cfg.center, width=cfg.width, xi0=cfg.xi0
    )
    start = time.perf_counter()
    traj = simulate.run(
        init, params, grid, cfg.dt, cfg.t_end, cfg.record_every, layers=None, snapshot_every=cfg.snapshot_every
    )
    elapsed = time.perf_counter() - start
    hd = spectrum.hopf_point(params, cfg.n)
    est = summary = None
    try:
        est = analyze.extract_periods(traj.times, traj.mean_u)
    except analyze.TooFewCyclesError:
        pass
    if est is not None and hd.valid:
        rel = analyze.relative_error_series(est, hd.period)
        summary = analyze.AnalysisSummary(est.first_period, hd.period, float(rel[0]), relative_errors_pct=rel.tolist())
    if summary is not None and traj.layer_count >= 2:
        try:
            summary.antiphase_score = analyze.antiphase_score(
                traj.layers[:, 0], traj.layers[:, 1], traj.times, ANTIPHASE_WINDOW
            )
        except analyze.InsufficientDataError:
            pass
    return RunResult(cfg, traj, hd.period, est, summary, elapsed)


def _check_first_period(r: RunResult) -> Check:
    p = r.estimate.first_period if r.estimate else float("nan")
    return Check("first_period", 37.0 <= p <= 39.0, f"first period {fmt(p)} in [37, 39]")


def _check_first_error(r: RunResult) -> Check:
    e = r.summary.first_relative_error_pct if r.summary else float("nan")
    return Check("first_error", abs(e - 2.1) <= 1.0, f"first relative error {e:.4f}% within 2.1 +/- 1.0")


def _check_error_trend(r: RunResult) -> Check:
    rel = np.array(r.summary.relative_errors_pct if r.summary else [])
    if rel.size < 3:
        return Check("error_trend", False, "fewer than 3 cycles")
    rising = float(np.mean(np.diff(rel) >= 0))
    ok = rel[-1] > rel[0] and rising >= 0.8 and 1.9 <= rel[-1] <= 3.9
    return Check("error_trend", bool(ok), f"{rel[0]:.4f}% -> {rel[-1]:.4f}% over {rel.size} cycles, {rising:.0%} rising steps, final in [1.9, 3.9]")


def _check_converges(r: RunResult) -> Check:
    prof = build_profile(r.config.eps, r.config.n, -1)
    dev = float(np.max(np.abs(r.trajectory.final.u - prof(simulate.Grid(r.config.nodes).x))))
    return Check("converges", dev < 0.05, f"max|u - u_n^-| = {dev:.3e} at t={fmt(r.trajectory.final.t)} (< 0.05)")


def _check_amplitude(r: RunResult) -> Check:
    tr = r.trajectory
    a0, a1 = (analyze.oscillation_amplitude(tr.times, tr.mean_u, t, r.exact_period) for t in B1_TIMES)
    return Check("amplitude_grows", a1 > a0, f"amplitude {a0:.4f} at t={B1_TIMES[0]:g} -> {a1:.4f} at t={B1_TIMES[1]:g}")


def _check_antiphase(r: RunResult) -> Check:
    tr = r.trajectory
    try:
        s = analyze.antiphase_score(tr.layers[:, 0], tr.layers[:, 1], tr.times, ANTIPHASE_WINDOW)
    except (analyze.InsufficientDataError, IndexError) as exc:
        return Check("antiphase", False, str(exc))
    return Check("antiphase", s < analyze.ANTIPHASE_THRESHOLD, f"score {s:.6f} on t in {list(ANTIPHASE_WINDOW)} (< -0.5)")


def _check_constant(r: RunResult) -> Check:
    u = r.trajectory.final.u
    spread = float(np.ptp(u))
    ok = spread < 1e-2 and abs(float(np.mean(u)) - 1.0 / math.sqrt(2.0)) < 1e-2
    return Check("constant_final", ok, f"spread {spread:.3e}, mean {fmt(float(np.mean(u)))}, xi {fmt(r.trajectory.final.xi)}")


CHECKS: dict[str, Callable[[RunResult], Check]] = {
    "first_period": _check_first_period,
    "first_error": _check_first_error,
    "error_trend": _check_error_trend,
    "converges": _check_converges,
    "amplitude_grows": _check_amplitude,
    "antiphase": _check_antiphase,
    "constant_final": _check_constant,
}


def run_preset(name: str) -> tuple[RunResult, list[Check]]:
    preset = PRESETS[name]
    result = execute(preset.config)
    return result, [CHECKS[c](result) for c in preset.checks]


@dataclass
class SweepRow:
    eps: float
    period: float
    period_asym: float
    tau: float
    tau_asym: float
    chi: float
    chi_asym: float

    @property
    def ratios(self) -> tuple[float, float, float]:
        return self.period / self.period_asym, self.tau / self.tau_asym, self.chi / self.chi_asym


def asymptotic_sweep(eps_grid=SWEEP_EPS, n: int = 1, params: Params | None = None) -> list[SweepRow]:
    base = params or Params(eps_grid[0], 1.0)
    rows = []
    for e in eps_grid:
        p = Params(e, base.tau, base.alpha, base.beta, base.gamma)
        hd = spectrum.hopf_point(p, n)
        pa, ta, ca = spectrum.hopf_asymptotics(n, e, p)
        rows.append(SweepRow(e, hd.period, pa, hd.tau_n, ta, hd.chi_n, ca))
    return rows


def sweep_checks(rows: list[SweepRow]) -> list[Check]:
    out = []
    for i, label in enumerate(("period", "tau", "chi")):
        dev = [abs(r.ratios[i] - 1.0) for r in rows]
        tail = dev[-3:]
        mono = all(a > b for a, b in zip(tail, tail[1:]))
        out.append(Check(f"{label}_ratio", mono and dev[-1] < 0.05, f"|ratio-1| over last three eps: {', '.join(f'{d:.3e}' for d in tail)}"))
    return out


# ---------------------------------------------------------------- commands


def _params_from(args) -> Params:
    return Params(args.eps, 1.0, args.alpha, args.beta, args.gamma)


def exact_report(params: Params, n: int) -> tuple[dict[str, object], bool]:
    hd = spectrum.hopf_point(params, n)
    prof = hd.profile
    mu0, mun = spectrum.mu_extremes(prof)
    pa, ta, ca = spectrum.hopf_asymptotics(n, params.eps, params)
    rec: dict[str, object] = {
        "eps": params.eps,
        "n": n,
        "alpha": params.alpha,
        "beta": params.beta,
        "gamma": params.gamma,
        "k": prof.modulus.k,
        "one_minus_k2": prof.modulus.m1,
        "rho": prof.rho,
        "mass2": prof.mass2,
        "delta": params.delta,
        "chi_n": hd.chi_n,
        "valid": hd.valid,
        "tau_n": hd.tau_n,
        "lambda_In": hd.lambda_In,
        "period": hd.period,
        "D": hd.D,
        "period_asym": pa,
        "tau_asym": ta,
        "chi_asym": ca,
        "mu0": mu0,
        "mun": mun,
    }
    if hd.valid:
        tr = spectrum.transversality(params, n)
        rec.update(
            dRe_dtau=tr.dRe_dtau,
            dIm_dtau=tr.dIm_dtau,
            simplicity_margin=spectrum.simplicity_margin(params, n),
        )
    return rec, hd.valid


def cmd_exact(args) -> int:
    rec, valid = exact_report(_params_from(args), args.n)
    for k, v in rec.items():
        print(f"{k}={fmt(v)}")
    if args.csv:
        Path(args.csv).write_text(",".join(rec) + "\n" + ",".join(fmt(v) for v in rec.values()) + "\n")
    if not valid:
        print("error: chi_n >= delta, the Hopf hypothesis fails", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def _write_run(result: RunResult, outdir: Path, checks: list[Check] | None = None) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(result.config.to_text())
    simulate.write_trajectory_csv(outdir / "trajectory.csv", result.trajectory)
    if result.trajectory.snapshots.size:
        simulate.write_snapshots_csv(outdir / "snapshots.csv", result.trajectory)
    if result.estimate is not None and math.isfinite(result.exact_period):
        analyze.write_analysis_csv(outdir / "analysis.csv", result.estimate, result.exact_period)
    fin = result.trajectory.final
    lines = [
        f"t_end={fmt(fin.t)}",
        f"final_mean_u={fmt(simulate.trapezoid_mean(fin.u))}",
        f"final_xi={fmt(fin.xi)}",
        f"final_u_min={fmt(float(fin.u.min()))}",
        f"final_u_max={fmt(float(fin.u.max()))}",
        f"exact_period={fmt(result.exact_period)}",
        f"runtime_s={result.elapsed:.3f}",
    ]
    s = result.summary
    if s is not None:
        lines += [f"first_period={fmt(s.first_period)}", f"first_relative_error_pct={fmt(s.first_relative_error_pct)}"]
        if s.antiphase_score is not None:
            lines += [f"antiphase_score={fmt(s.antiphase_score)}", f"antiphase={fmt(s.antiphase)}"]
    for c in checks or []:
        lines.append(f"check_{c.name}={'pass' if c.passed else 'FAIL'}  # {c.detail}")
    text = "\n".join(lines) + "\n"
    (outdir / "summary.txt").write_text(text)
    print(text, end="")


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output = args.out
    cfg.validate()
    outdir = Path(cfg.output) if cfg.output else output_root() / Path(args.config).stem
    result = execute(cfg)
    _write_run(result, outdir)
    print(f"wrote {outdir}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cols = simulate.read_trajectory_csv(args.trajectory)
    if args.exact_period is not None:
        exact = args.exact_period
    else:
        hd = spectrum.hopf_point(_params_from(args), args.n)
        if not hd.valid:
            print("error: chi_n >= delta, no exact period", file=sys.stderr)
            return EXIT_DOMAIN
        exact = hd.period
    est = analyze.extract_periods(cols["t"], cols["mean_u"], skip=args.skip)
    rel = analyze.relative_error_series(est, exact)
    summary = analyze.AnalysisSummary(est.first_period, exact, float(rel[0]), relative_errors_pct=rel.tolist())
    layer_cols = sorted(k for k in cols if k.startswith("layer_"))
    if len(layer_cols) >= 2:
        try:
            summary.antiphase_score = analyze.antiphase_score(
                cols[layer_cols[0]], cols[layer_cols[1]], cols["t"], tuple(args.window)
            )
        except analyze.InsufficientDataError as exc:
            print(f"note: no anti-phase score ({exc})", file=sys.stderr)
    outdir = Path(args.out) if args.out else Path(args.trajectory).parent
    outdir.mkdir(parents=True, exist_ok=True)
    analyze.write_analysis_csv(outdir / "analysis.csv", est, exact)
    print(f"first_period={fmt(summary.first_period)}")
    print(f"exact_period={fmt(exact)}")
    print(f"first_relative_error_pct={fmt(summary.first_relative_error_pct)}")
    print(f"cycles={len(rel)}")
    if summary.antiphase_score is not None:
        print(f"antiphase_score={fmt(summary.antiphase_score)}")
        print(f"antiphase={fmt(summary.antiphase)}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.preset not in PRESET_NAMES:
        print(f"error: unknown preset {args.preset!r}; choose from {', '.join(PRESET_NAMES)}", file=sys.stderr)
        return EXIT_USAGE
    outdir = Path(args.out) if args.out else output_root() / args.preset
    if args.preset == "sweep":
        rows = asymptotic_sweep()
        checks = sweep_checks(rows)
        outdir.mkdir(parents=True, exist_ok=True)
        header = "eps,period,period_asym,period_ratio,tau,tau_asym,tau_ratio,chi,chi_asym,chi_ratio"
        body = []
        for r in rows:
            pr, tr_, cr = r.ratios
            body.append(",".join(fmt(v) for v in (r.eps, r.period, r.period_asym, pr, r.tau, r.tau_asym, tr_, r.chi, r.chi_asym, cr)))
        (outdir / "sweep.csv").write_text(header + "\n" + "\n".join(body) + "\n")
        print(header)
        print("\n".join(body))
        for c in checks:
            print(f"check_{c.name}={'pass' if c.passed else 'FAIL'}  # {c.detail}")
    else:
        result, checks = run_preset(args.preset)
        _write_run(result, outdir, checks)
    print(f"wrote {outdir}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; 2 is reserved here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_params(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--eps", type=float, required=required)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shadowhopf", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", help="closed-form critical data")
    _add_params(p)
    p.add_argument("--csv", help="also write a one-row CSV here")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="run a key=value config file")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: $SHADOWHOPF_OUT/<config stem>)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="periods and relative errors of a trajectory CSV")
    p.add_argument("trajectory")
    p.add_argument("--exact-period", type=float)
    _add_params(p, required=False)
    p.add_argument("--skip", type=float, default=0.0, help="ignore t < skip")
    p.add_argument("--window", type=float, nargs=2, default=list(ANTIPHASE_WINDOW), metavar=("T0", "T1"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", help="run a named experiment: " + ", ".join(PRESET_NAMES))
    p.add_argument("preset")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "analyze" and args.exact_period is None and args.eps is None:
        parser.error("analyze needs --exact-period or --eps")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except simulate.BlowUpError as exc:
        print(f"error: {exc} (last finite time {fmt(exc.t_last)})", file=sys.stderr)
        return EXIT_FAILURE
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
