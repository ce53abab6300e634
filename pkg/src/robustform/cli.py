"""Command-line interface: check, certify, simulate, plot.

Exit codes form the machine-readable half of the contract:

  check     0 assumptions pass, 1 violated, 2 parse error
  certify   0 certified and sampling agrees, 1 inconclusive,
            2 parse error, 3 solver failure
  simulate  0 clean run, 1 precondition or convergence failure,
            2 parse error, 4 invariant violation, 5 barrier domain
            violation
  plot      0 plots written, 2 missing or corrupt run directory

Every output byte is a pure function of (scenario file, flags, seed): no
timestamps, no environment leakage, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certifier import certify, sample_lambda2
from .netgraph import validate_assumptions
from .scenario import ScenarioSpec
from .simulate import PreconditionError, run

MANIFEST_FORMAT = "run-manifest/1"


def _resolve_scenario_path(path: str) -> str:
    """A bare shipped-scenario name resolves to the packaged file."""
    from .scenario import BUILTIN, builtin_path
    if not os.path.exists(path) and path in BUILTIN:
        return str(builtin_path(path))
    return path


def _load_scenario(path: str) -> ScenarioSpec:
    """Parse a scenario file; raises SystemExit(2) with a location."""
    path = _resolve_scenario_path(path)
    try:
        return ScenarioSpec.load(path)
    except FileNotFoundError:
        print(f"error: no such scenario file: {path}", file=sys.stderr)
        raise SystemExit(2)
    except json.JSONDecodeError as err:
        print(f"error: {path}:{err.lineno}:{err.colno}: {err.msg}",
              file=sys.stderr)
        raise SystemExit(2)
    except (KeyError, TypeError, ValueError) as err:
        print(f"error: {path}: invalid scenario: {err}", file=sys.stderr)
        raise SystemExit(2)


def _box_containment_issues(spec: ScenarioSpec) -> list[str]:
    """Necessary-condition check that the box encloses the region.

    If the region's defining polynomials are all strictly positive at a
    box corner, the region reaches the box boundary with margin and very
    likely spills outside it."""
    adj = spec.adjacency
    r = adj.r
    if r == 0 or not adj.omega:
        return []
    issues = []
    corners = np.array(np.meshgrid(
        *[np.array(b) for b in adj.box], indexing="ij")
    ).reshape(r, -1).T
    for corner in corners:
        vals = [float(s.eval_batch(corner[None, :])[0]) for s in adj.omega]
        if all(v > 1e-9 for v in vals):
            issues.append(
                f"box corner {corner.tolist()} lies strictly inside the "
                f"parameter region; the sampling box may truncate it")
    return issues


def cmd_check(args) -> int:
    spec = _load_scenario(args.scenario)
    report = validate_assumptions(spec.tau, spec.formation_edges,
                                  spec.positions, spec.geometry,
                                  overrides=spec.assumption_overrides)
    lines = report.summary_lines()
    issues = _box_containment_issues(spec)
    print(f"scenario {spec.name}: {spec.n_agents} agents, "
          f"{len(spec.formation_edges)} formation edges, "
          f"{spec.adjacency.r} uncertain parameters")
    for line in lines:
        print(line)
    for issue in issues:
        print(f"box: {issue}")
    if report.all_pass and not issues:
        print("check: OK")
        return 0
    print("check: FAILED")
    return 1


def cmd_certify(args) -> int:
    spec = _load_scenario(args.scenario)
    adj = spec.adjacency
    res = certify(adj, d_P=args.dP, tol=args.tol)
    if res.solution is not None and not res.solution.ok:
        print(f"solver failure: {res.status}")
        return 3
    samples = sample_lambda2(adj, n_samples=args.samples, seed=args.seed)
    print(f"c_star = {res.c_star:.9g}")
    print(f"degree plan: d_P={res.certificate.plan.d_P} "
          f"d_H={res.certificate.plan.d_H} "
          f"d_R={list(res.certificate.plan.d_R)}")
    print(f"sampled min lambda2 = {samples.min_value:.9g} "
          f"over {args.samples} points")
    out = args.out or f"{spec.name}_certificate.json"
    res.certificate.save(out)
    print(f"certificate written to {out}")
    if res.connected and samples.min_value > 0.0:
        print("certify: CONNECTED")
        return 0
    print("certify: INCONCLUSIVE; consider rerunning with "
          f"--dP {args.dP + 1} for a richer multiplier degree")
    return 1


def _csv_num(x: float) -> str:
    return format(float(x), ".17g")


def _write_trajectory_csv(path: Path, log, dim: int) -> None:
    cols = ["t", "agent"]
    cols += [f"x{k}" for k in range(dim)]
    cols += [f"v{k}" for k in range(dim)]
    cols += [f"u{k}" for k in range(dim)]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for s in range(log.times.shape[0]):
            for a in range(log.positions.shape[1]):
                row = [_csv_num(log.times[s]), str(a)]
                row += [_csv_num(v) for v in log.positions[s, a]]
                row += [_csv_num(v) for v in log.velocities[s, a]]
                row += [_csv_num(v) for v in log.controls[s, a]]
                w.writerow(row)


def _write_energy_csv(path: Path, log) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "W"])
        for t, W in zip(log.W_times, log.W_values):
            w.writerow([_csv_num(t), _csv_num(W)])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _write_events_jsonl(path: Path, events) -> None:
    with path.open("w") as fh:
        for ev in events:
            if ev["type"] == "switch":
                for pair in ev["added"]:
                    fh.write(json.dumps(_jsonable(
                        {"t": ev["t"], "pair": list(pair),
                         "action": "add"})) + "\n")
                for pair in ev["removed"]:
                    fh.write(json.dumps(_jsonable(
                        {"t": ev["t"], "pair": list(pair),
                         "action": "remove"})) + "\n")
            elif ev["type"] == "zone":
                for pair in ev["entered"]:
                    fh.write(json.dumps(_jsonable(
                        {"t": ev["t"], "pair": list(pair),
                         "action": "zone_enter"})) + "\n")
                for pair in ev["left"]:
                    fh.write(json.dumps(_jsonable(
                        {"t": ev["t"], "pair": list(pair),
                         "action": "zone_leave"})) + "\n")
            else:
                doc = {"action": ev["type"]}
                doc.update({k: v for k, v in ev.items() if k != "type"})
                fh.write(json.dumps(_jsonable(doc)) + "\n")


def cmd_simulate(args) -> int:
    scenario_path = _resolve_scenario_path(args.scenario)
    spec = _load_scenario(scenario_path)
    scenario_bytes = Path(scenario_path).read_bytes()
    try:
        res = run(spec, seed=args.seed, T_end=args.T, dt=args.dt,
                  unsafe=args.unsafe)
    except PreconditionError as err:
        print(f"precondition failed: {err}", file=sys.stderr)
        return 1

    out_root = Path(args.out)
    run_dir = out_root / f"{spec.name}_seed{args.seed}"
    run_dir.mkdir(parents=True, exist_ok=True)

    outputs = ["trajectory.csv", "energy.csv", "metrics.json",
               "events.jsonl", "manifest.json"]
    _write_trajectory_csv(run_dir / "trajectory.csv", res.log, spec.dim)
    _write_energy_csv(run_dir / "energy.csv", res.log)
    (run_dir / "metrics.json").write_text(
        json.dumps(_jsonable(res.metrics), indent=2) + "\n")
    _write_events_jsonl(run_dir / "events.jsonl", res.log.events)

    cert_name = None
    cert_obj = getattr(res.cert, "certificate", res.cert)
    if cert_obj is not None and hasattr(cert_obj, "save"):
        cert_name = "certificate.json"
        cert_obj.save(run_dir / cert_name)
        outputs.append(cert_name)

    # the convergence budget is defined at the scenario's own horizon;
    # a run cut short by --T is judged on invariants alone
    dt_used = args.dt if args.dt is not None else spec.dt
    full_horizon = res.metrics["t_final"] >= spec.T_end - 0.5 * dt_used
    converged = True
    if spec.conv_tol is not None and res.metrics["n_steps_taken"] > 0 \
            and full_horizon:
        converged = (
            res.metrics["formation_error"] <= spec.conv_tol
            and res.metrics["velocity_disagreement"] <= spec.conv_tol)

    manifest = {
        "format": MANIFEST_FORMAT,
        "tool_version": __version__,
        "scenario": {
            "name": spec.name,
            "path": str(scenario_path),
            "sha256": hashlib.sha256(scenario_bytes).hexdigest(),
            "n_agents": spec.n_agents,
            "dim": spec.dim,
            "geometry": {k: getattr(spec.geometry, k)
                         for k in ("r_a", "r_c", "r_z", "r_s", "d_s",
                                   "eps")},
            "formation_edges": sorted(list(e)
                                      for e in spec.formation_edges),
        },
        "seed": args.seed,
        "T_end": args.T if args.T is not None else spec.T_end,
        "dt": args.dt if args.dt is not None else spec.dt,
        "method": spec.method,
        "unsafe": bool(args.unsafe),
        "theta": _jsonable(res.theta),
        "barrier": {"mu1": res.params.mu1, "mu2": res.params.mu2,
                    "eps_hat": res.params.eps_hat},
        "tuned": res.tune is not None,
        "certificate": cert_name,
        "ok": res.ok,
        "converged": converged,
        "outputs": sorted(outputs),
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(_jsonable(manifest), indent=2) + "\n")

    print(f"run directory: {run_dir}")
    for k in ("t_final", "formation_error", "velocity_disagreement",
              "min_distance", "n_switches", "final_W"):
        print(f"  {k}: {res.metrics[k]}")
    if not res.ok:
        f = res.failure
        where = f" pair {f['pair']}" if "pair" in f else ""
        print(f"invariant violation: {f['kind']} at t={f['t']:.6g}{where}",
              file=sys.stderr)
        return 5 if res.exit_kind == "domain" else 4
    if not converged:
        print(f"run completed but convergence tolerance "
              f"{spec.conv_tol} was not met", file=sys.stderr)
        return 1
    print("simulate: OK")
    return 0


# ------------------------------------------------------------- plotting

_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


class _Chart:
    """Line chart emitted as a minimal standalone SVG."""

    W, H = 640, 480
    ML, MR, MT, MB = 62, 16, 36, 46

    def __init__(self, title: str, xlabel: str, ylabel: str,
                 equal_aspect: bool = False):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.equal_aspect = equal_aspect
        self.series = []
        self.hlines = []
        self.points = []

    def add_series(self, xs, ys, color: str, width: float = 1.5,
                   label: str | None = None):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        self.series.append((xs, ys, color, width, label))

    def add_hline(self, y: float, color: str, label: str | None = None):
        self.hlines.append((float(y), color, label))

    def add_point(self, x: float, y: float, color: str, radius: float):
        self.points.append((float(x), float(y), color, radius))

    def _ranges(self):
        xs = [s[0] for s in self.series if s[0].size] + \
            [np.array([p[0] for p in self.points])
             if self.points else np.zeros(0)]
        ys = [s[1] for s in self.series if s[1].size] + \
            [np.array([p[1] for p in self.points])
             if self.points else np.zeros(0)]
        ys += [np.array([h[0]]) for h in self.hlines]
        allx = np.concatenate([a for a in xs if a.size]) \
            if any(a.size for a in xs) else np.array([0.0, 1.0])
        ally = np.concatenate([a for a in ys if a.size]) \
            if any(a.size for a in ys) else np.array([0.0, 1.0])
        x0, x1 = float(allx.min()), float(allx.max())
        y0, y1 = float(ally.min()), float(ally.max())
        if x1 - x0 < 1e-12:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 - y0 < 1e-12:
            y0, y1 = y0 - 0.5, y1 + 0.5
        padx, pady = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        x0, x1 = x0 - padx, x1 + padx
        y0, y1 = y0 - pady, y1 + pady
        if self.equal_aspect:
            pw = self.W - self.ML - self.MR
            ph = self.H - self.MT - self.MB
            sx = (x1 - x0) / pw
            sy = (y1 - y0) / ph
            s = max(sx, sy)
            cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
            x0, x1 = cx - s * pw / 2, cx + s * pw / 2
            y0, y1 = cy - s * ph / 2, cy + s * ph / 2
        return x0, x1, y0, y1

    def _ticks(self, lo: float, hi: float, n: int = 5):
        span = hi - lo
        step = 10.0 ** math.floor(math.log10(span / n))
        for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
            if span / (step * mult) <= n:
                step *= mult
                break
        first = math.ceil(lo / step) * step
        ticks = []
        v = first
        while v <= hi + 1e-9 * span:
            ticks.append(0.0 if abs(v) < 1e-12 * span else v)
            v += step
        return ticks

    def render(self) -> str:
        x0, x1, y0, y1 = self._ranges()
        pw = self.W - self.ML - self.MR
        ph = self.H - self.MT - self.MB

        def X(x):
            return self.ML + (x - x0) / (x1 - x0) * pw

        def Y(y):
            return self.MT + (y1 - y) / (y1 - y0) * ph

        out = []
        out.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{self.W}" height="{self.H}" '
            f'viewBox="0 0 {self.W} {self.H}">')
        out.append(f'<rect width="{self.W}" height="{self.H}" '
                   f'fill="#ffffff"/>')
        out.append(
            f'<text x="{self.W // 2}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">'
            f'{self.title}</text>')
        out.append(
            f'<rect x="{self.ML}" y="{self.MT}" width="{pw}" '
            f'height="{ph}" fill="none" stroke="#333333"/>')
        for tx in self._ticks(x0, x1):
            px = X(tx)
            out.append(f'<line x1="{_fmt(px)}" y1="{self.MT + ph}" '
                       f'x2="{_fmt(px)}" y2="{self.MT + ph + 4}" '
                       f'stroke="#333333"/>')
            out.append(f'<text x="{_fmt(px)}" y="{self.MT + ph + 18}" '
                       f'text-anchor="middle" font-family="sans-serif" '
                       f'font-size="11">{_fmt(tx)}</text>')
        for ty in self._ticks(y0, y1):
            py = Y(ty)
            out.append(f'<line x1="{self.ML - 4}" y1="{_fmt(py)}" '
                       f'x2="{self.ML}" y2="{_fmt(py)}" '
                       f'stroke="#333333"/>')
            out.append(f'<text x="{self.ML - 7}" y="{_fmt(py + 4)}" '
                       f'text-anchor="end" font-family="sans-serif" '
                       f'font-size="11">{_fmt(ty)}</text>')
        out.append(
            f'<text x="{self.ML + pw // 2}" y="{self.H - 8}" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'font-size="12">{self.xlabel}</text>')
        out.append(
            f'<text x="16" y="{self.MT + ph // 2}" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'font-size="12" transform="rotate(-90 16 '
            f'{self.MT + ph // 2})">{self.ylabel}</text>')
        for yv, color, label in self.hlines:
            py = Y(yv)
            out.append(f'<line x1="{self.ML}" y1="{_fmt(py)}" '
                       f'x2="{self.ML + pw}" y2="{_fmt(py)}" '
                       f'stroke="{color}" stroke-dasharray="6,4"/>')
            if label:
                out.append(
                    f'<text x="{self.ML + pw - 4}" y="{_fmt(py - 5)}" '
                    f'text-anchor="end" font-family="sans-serif" '
                    f'font-size="11" fill="{color}">{label}</text>')
        for xs, ys, color, width, label in self.series:
            if xs.size == 0:
                continue
            pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}"
                           for a, b in zip(xs, ys))
            if xs.size == 1:
                a, b = float(xs[0]), float(ys[0])
                out.append(f'<circle cx="{_fmt(X(a))}" cy="{_fmt(Y(b))}" '
                           f'r="2.5" fill="{color}"/>')
            else:
                out.append(f'<polyline points="{pts}" fill="none" '
                           f'stroke="{color}" '
                           f'stroke-width="{_fmt(width)}"/>')
        for x, y, color, radius in self.points:
            out.append(f'<circle cx="{_fmt(X(x))}" cy="{_fmt(Y(y))}" '
                       f'r="{_fmt(radius)}" fill="{color}"/>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _read_run_dir(run_dir: Path):
    manifest = json.loads((run_dir / "manifest.json").read_text())
    rows = []
    with (run_dir / "trajectory.csv").open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for row in reader:
            rows.append([float(v) for v in row])
    dim = (len(header) - 2) // 3
    data = np.array(rows) if rows else np.zeros((0, 2 + 3 * dim))
    times = np.unique(data[:, 0]) if rows else np.zeros(0)
    N = int(manifest["scenario"]["n_agents"])
    S = times.shape[0]
    positions = np.zeros((S, N, dim))
    velocities = np.zeros((S, N, dim))
    t_index = {t: k for k, t in enumerate(times)}
    for row in rows:
        s = t_index[row[0]]
        a = int(row[1])
        positions[s, a] = row[2:2 + dim]
        velocities[s, a] = row[2 + dim:2 + 2 * dim]
    erows = []
    with (run_dir / "energy.csv").open() as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            erows.append((float(row[0]), float(row[1])))
    energy = np.array(erows) if erows else np.zeros((0, 2))
    return manifest, times, positions, velocities, energy


def cmd_plot(args) -> int:
    run_dir = Path(args.run_dir)
    try:
        manifest, times, positions, velocities, energy = \
            _read_run_dir(run_dir)
    except (FileNotFoundError, json.JSONDecodeError, ValueError,
            KeyError) as err:
        print(f"error: cannot read run directory {run_dir}: {err}",
              file=sys.stderr)
        return 2

    N = int(manifest["scenario"]["n_agents"])
    d_s = float(manifest["scenario"]["geometry"]["d_s"])
    fe = [tuple(e) for e in manifest["scenario"]["formation_edges"]]

    chart = _Chart("Agent trajectories", "x", "y", equal_aspect=True)
    for a in range(N):
        color = _PALETTE[a % len(_PALETTE)]
        if times.size:
            chart.add_series(positions[:, a, 0], positions[:, a, 1],
                             color, 1.2)
            chart.add_point(positions[-1, a, 0], positions[-1, a, 1],
                            color, 4.0)
    if times.size:
        for (i, j) in fe:
            chart.add_series(
                np.array([positions[-1, i, 0], positions[-1, j, 0]]),
                np.array([positions[-1, i, 1], positions[-1, j, 1]]),
                "#999999", 0.8)
    (run_dir / "trajectories.svg").write_text(chart.render())

    iu, ju = np.triu_indices(N, k=1)
    chart = _Chart("Minimum pairwise distance", "t", "distance")
    if times.size:
        dmin = np.array([
            float(np.min(np.linalg.norm(p[iu] - p[ju], axis=1)))
            for p in positions])
        chart.add_series(times, dmin, _PALETTE[0], 1.6)
    chart.add_hline(d_s, "#d62728", f"d_s = {_fmt(d_s)}")
    (run_dir / "min_distance.svg").write_text(chart.render())

    chart = _Chart("Velocity disagreement", "t", "max |v_i - v_j|")
    if times.size:
        vdis = np.array([
            float(np.max(np.linalg.norm(v[iu] - v[ju], axis=1)))
            for v in velocities])
        chart.add_series(times, vdis, _PALETTE[1], 1.6)
    (run_dir / "velocity_diff.svg").write_text(chart.render())

    chart = _Chart("Composite energy", "t", "W")
    if energy.shape[0]:
        chart.add_series(energy[:, 0], energy[:, 1], _PALETTE[2], 1.6)
    (run_dir / "energy.svg").write_text(chart.render())

    for name in ("trajectories.svg", "min_distance.svg",
                 "velocity_diff.svg", "energy.svg"):
        print(f"wrote {run_dir / name}")
    return 0


def _apply_thread_cap() -> None:
    cap = os.environ.get("RF_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        print(f"warning: ignoring non-integer RF_THREADS={cap!r}",
              file=sys.stderr)
        return
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="robustform",
        description="certified formation control under uncertain "
                    "communication weights")
    ap.add_argument("--version", action="version",
                    version=f"robustform {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check",
                       help="validate a scenario against the setup "
                            "assumptions")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify",
                       help="produce a worst-case connectivity "
                            "certificate")
    p.add_argument("scenario")
    p.add_argument("--dP", type=int, default=0,
                   help="polynomial degree of the dual variable")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="interior-point termination tolerance")
    p.add_argument("--samples", type=int, default=10000,
                   help="sample count for the eigenvalue cross-check")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the sampling cross-check")
    p.add_argument("--out", default=None,
                   help="certificate output path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="run one seeded simulation")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=float, default=None,
                   help="horizon override")
    p.add_argument("--dt", type=float, default=None,
                   help="step-size override")
    p.add_argument("--unsafe", action="store_true",
                   help="skip assumption and certificate gating")
    p.add_argument("--out", default="runs",
                   help="directory that will hold the run directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot",
                       help="render SVG charts from a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
