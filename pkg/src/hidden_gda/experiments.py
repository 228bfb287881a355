"""Experiment runners behind the command line.

Every runner takes a validated :class:`~hidden_gda.config.ExperimentConfig`
and an output directory, writes its CSV/report/SVG artifacts there and
returns a :class:`RunResult`.  Integration failures leave the samples
computed so far on disk and are re-raised as :class:`NumericFailure`.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import svgplot
from .analysis import (
    build_spurious_system,
    detect_period,
    discrete_energy_audit,
    disk_perturbations,
    fixed_point_report,
    recurrence_stats,
    state_at,
    time_average,
    window_average,
)
from .conservation import EnergyContext, UnsafeContextError, divergence_check, energy_of_states, \
    transformed_field, volume_coordinates
from .dynamics import HiddenSystem2x2, HiddenSystemMulti, dgda, field_multi, write_trajectory_csv, _fmt
from .integrate import IntegrationError, Trajectory, integrate
from .reparam import RangeError, build_reparam, is_safe_multi
from .rng import SplitMix64


class NumericFailure(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass
class RunResult:
    kind: str
    out_dir: str
    report: dict
    files: list = field(default_factory=list)
    status: str = "ok"


# ----------------------------------------------------------------------------
# helpers

def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt_value(x) for x in np.asarray(v).ravel().tolist()) + "]"
    if v is None:
        return "none"
    return str(v)


def write_report(path, report):
    with open(path, "w") as fh:
        for key, value in report.items():
            fh.write(f"{key}={_fmt_value(value)}\n")


def write_series_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


class _Output:
    def __init__(self, out_dir):
        self.dir = out_dir
        self.files = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.dir, name)
        self.files.append(p)
        return p


def _make_system(cfg):
    if cfg.kind in ("recurrence_multi", "divergence_check"):
        return HiddenSystemMulti(cfg.f_fields, cfg.g_fields, cfg.game)
    return HiddenSystem2x2(cfg.f_fields[0], cfg.g_fields[0], cfg.game)


def _centers(sys, center):
    fields = list(sys.f_fields) + list(sys.g_fields)
    eq = np.concatenate([np.atleast_1d(sys.p), np.atleast_1d(sys.q)])
    if center == "zero":
        return np.zeros(len(fields))
    return np.array([float(f.inverse(v)) for f, v in zip(fields, eq)])


def initial_states(cfg, sys, rng):
    """Batch of initial states ``(n, sys.size)`` from the ``[init]`` section."""
    init = cfg.init
    nf = len(sys.f_fields) + len(sys.g_fields)
    if init["mode"] == "explicit":
        if isinstance(sys, HiddenSystem2x2):
            th = np.atleast_1d(np.asarray(init["theta"], dtype=float))
            ph = np.atleast_1d(np.asarray(init["phi"], dtype=float))
            return np.stack([th, ph], axis=-1)
        th = np.atleast_2d(np.asarray(init["theta"], dtype=float))
        ph = np.atleast_2d(np.asarray(init["phi"], dtype=float))
        return sys.pack(th, ph, init["lambda"], init["mu"])
    centers = _centers(sys, init["center"])
    rows = []
    for _ in range(init["count"]):
        params = [c + rng.uniform(-init["spread"], init["spread"]) for c in centers]
        if sys.has_multipliers:
            ms = init["multiplier_spread"]
            lam = init["lambda"] + (rng.uniform(-ms, ms) if ms > 0 else 0.0)
            mu = init["mu"] + (rng.uniform(-ms, ms) if ms > 0 else 0.0)
            params += [lam, mu]
        rows.append(params)
    x0 = np.array(rows, dtype=float)
    assert x0.shape[1] == (nf + 2 if sys.has_multipliers else nf)
    return x0


def _safety(sys, x0):
    """Per-seed ``(ok, reason)`` for the state ``x0`` (one row)."""
    theta, phi, _, _ = sys.unpack(x0)
    fmaps = [build_reparam(f, [theta[i]]) for i, f in enumerate(sys.f_fields)]
    gmaps = [build_reparam(g, [phi[j]]) for j, g in enumerate(sys.g_fields)]
    p, q = np.atleast_1d(sys.p), np.atleast_1d(sys.q)
    return is_safe_multi(fmaps, gmaps, p, q, single=isinstance(sys, HiddenSystem2x2))


def _energy_context(sys, x0, tol):
    try:
        return EnergyContext.for_system(sys, x0, tol=tol)
    except UnsafeContextError:
        return None


def _energies(ctx, sys, states):
    if ctx is None:
        return np.full(len(states), np.nan)
    try:
        return np.asarray(energy_of_states(ctx, sys, states), dtype=float)
    except RangeError:
        return np.full(len(states), np.nan)


def _integrate(cfg, sys, x0, out, report):
    try:
        return integrate(sys.field, x0, cfg.horizon, cfg.method, cfg.sample_every)
    except IntegrationError as exc:
        report["status"] = "numeric_failure"
        report["truncated"] = True
        report["truncation_time"] = float(exc.last_time)
        report["error"] = str(exc)
        partial = exc.partial
        if partial is not None and len(partial.times):
            for k in range(partial.states.shape[1]):
                tr = Trajectory(partial.times, partial.states[:, k], truncated=True)
                sys_obs = sys.observables(tr.states)
                tr.observables.update(sys_obs)
                write_trajectory_csv(out.path(f"trajectory_{k:03d}.csv"), sys, tr)
        write_report(out.path("report.txt"), report)
        raise NumericFailure(str(exc), RunResult(cfg.kind, out.dir, report, out.files, "numeric_failure")) from exc


def _seed_trajectory(sys, traj, k, H):
    tr = traj.select(k)
    tr.observables.update(sys.observables(tr.states))
    tr.observables["H"] = H
    return tr


def _base_report(cfg, sys):
    report = {"kind": cfg.kind, "status": "ok", "truncated": False, "config": cfg.source, "seed": cfg.seed}
    if cfg.description:
        report["description"] = cfg.description
    report["game.U"] = sys.game.U
    report["equilibrium.p"] = np.atleast_1d(sys.p)
    report["equilibrium.q"] = np.atleast_1d(sys.q)
    report["equilibrium.value"] = float(sys.eq.value)
    report["fields.f"] = "; ".join(str(f) for f in sys.f_fields)
    report["fields.g"] = "; ".join(str(g) for g in sys.g_fields)
    return report


# ----------------------------------------------------------------------------
# cycle2x2 / time_average

def run_cycle(cfg, out_dir, averages_only=False):
    sys = _make_system(cfg)
    out = _Output(out_dir)
    rng = SplitMix64(cfg.seed)
    x0 = initial_states(cfg, sys, rng)
    report = _base_report(cfg, sys)
    report["integrator"] = type(cfg.method).__name__.lower()
    report["horizon"] = cfg.horizon
    report["seeds"] = len(x0)
    traj = _integrate(cfg, sys, x0, out, report)
    times = traj.times
    fv, gv = sys.activations(traj.states)
    payoff = sys.observables(traj.states)["payoff"]
    eps = cfg.analysis["period_eps"]
    value = sys.eq.value

    phase, avg_panel, energy_panel = [], [], []
    for k in range(len(x0)):
        key = f"seed.{k}"
        ok, reason = _safety(sys, x0[k])
        report[f"{key}.theta0"] = x0[k, 0]
        report[f"{key}.phi0"] = x0[k, 1]
        report[f"{key}.safe"] = ok
        report[f"{key}.safety"] = reason
        ctx = _energy_context(sys, x0[k], cfg.analysis["quad_tol"]) if ok else None
        H = _energies(ctx, sys, traj.states[:, k])
        if ctx is not None:
            drift = float(np.max(np.abs(H - H[0])) / max(1.0, abs(H[0])))
            report[f"{key}.H0"] = float(H[0])
            report[f"{key}.H_rel_drift"] = drift
            energy_panel.append(svgplot.Series(times, H, f"seed {k}"))

        running_f, avg_f = time_average(times, fv[:, k, 0])
        running_g, avg_g = time_average(times, gv[:, k, 0])
        running_r, avg_r = time_average(times, payoff[:, k])
        report[f"{key}.avg_f"] = float(avg_f)
        report[f"{key}.avg_g"] = float(avg_g)
        report[f"{key}.avg_payoff"] = float(avg_r)
        report[f"{key}.avg_f_error"] = abs(float(avg_f) - sys.p)
        report[f"{key}.avg_g_error"] = abs(float(avg_g) - sys.q)
        report[f"{key}.avg_payoff_error"] = abs(float(avg_r) - value)

        if averages_only:
            write_series_csv(out.path(f"running_average_{k:03d}.csv"), ["t", "avg_f", "avg_g", "avg_payoff"],
                             [times, running_f, running_g, running_r])
            avg_panel.append(svgplot.Series(times, running_f, f"avg f, seed {k}" if k < 4 else ""))
        else:
            fg = np.concatenate([fv[:, k], gv[:, k]], axis=-1)
            period = detect_period(times, fg, eps)
            if period is None:
                stationary = bool(np.all(np.linalg.norm(fg - fg[0], axis=-1) <= 2 * eps))
                report[f"{key}.period"] = None
                report[f"{key}.period_status"] = "stationary" if stationary else "no return within horizon"
            else:
                report[f"{key}.period"] = period.period
                report[f"{key}.period_status"] = "found"
                report[f"{key}.return_distance"] = period.distance
                if 2 * period.period <= times[-1]:
                    d2 = float(np.linalg.norm(state_at(times, fg, 2 * period.period) - fg[0]))
                    report[f"{key}.return_distance_2P"] = d2
                window = times <= min(times[-1], period.period + 4 * cfg.sample_every)
                report[f"{key}.period_avg_f"] = float(window_average(times[window], fv[window, k, 0], period.period))
                report[f"{key}.period_avg_g"] = float(window_average(times[window], gv[window, k, 0], period.period))
        write_trajectory_csv(out.path(f"trajectory_{k:03d}.csv"), sys, _seed_trajectory(sys, traj, k, H))
        phase.append(svgplot.Series(fv[:, k, 0], gv[:, k, 0], f"seed {k}" if k < 6 else ""))

    phase.append(svgplot.Series([sys.p], [sys.q], "(p, q)", kind="scatter", color="#000000"))
    if averages_only:
        panels = [svgplot.Panel("Running time average of f", "t", "avg f", avg_panel)]
        svg = "averages.svg"
    else:
        panels = [svgplot.Panel("Continuous GDA orbits in (f, g)", "f", "g", phase, xlim=(0, 1), ylim=(0, 1))]
        if energy_panel:
            panels.append(svgplot.Panel("Energy H along each orbit", "t", "H", energy_panel))
        svg = "phase.svg"
    svgplot.write_svg(out.path(svg), panels)
    write_report(out.path("report.txt"), report)
    return RunResult(cfg.kind, out.dir, report, out.files)


# ----------------------------------------------------------------------------
# recurrence_multi

def run_recurrence(cfg, out_dir):
    sys = _make_system(cfg)
    out = _Output(out_dir)
    rng = SplitMix64(cfg.seed)
    x0 = initial_states(cfg, sys, rng)
    report = _base_report(cfg, sys)
    report["integrator"] = type(cfg.method).__name__.lower()
    report["horizon"] = cfg.horizon
    report["seeds"] = len(x0)
    report["recurrence_eps"] = cfg.analysis["recurrence_eps"]
    report["warmup"] = cfg.analysis["warmup"]
    traj = _integrate(cfg, sys, x0, out, report)
    times = traj.times
    fv, gv = sys.activations(traj.states)
    _, _, lam, mu = sys.unpack(traj.states)

    events_rows = [[], [], [], []]
    trace_panel, dist_panel = [], []
    n_returned = 0
    for k in range(len(x0)):
        key = f"seed.{k}"
        ok, reason = _safety(sys, x0[k])
        report[f"{key}.safe"] = ok
        report[f"{key}.safety"] = reason
        ctx = _energy_context(sys, x0[k], cfg.analysis["quad_tol"]) if ok else None
        H = _energies(ctx, sys, traj.states[:, k])
        if ctx is None:
            report[f"{key}.recurrence"] = "undefined for unsafe initialization"
        else:
            report[f"{key}.H_rel_drift"] = float(np.max(np.abs(H - H[0])) / max(1.0, abs(H[0])))
            a, b, _, _ = volume_coordinates(ctx, fv[:, k], gv[:, k])
            Y = np.concatenate([a, b, lam[:, k, None], mu[:, k, None]], axis=-1)
            events = recurrence_stats(times, Y, cfg.analysis["recurrence_eps"], cfg.analysis["warmup"],
                                      raw_states=traj.states[:, k])
            report[f"{key}.returns"] = len(events)
            report[f"{key}.min_distance"] = float(np.min(np.linalg.norm(Y - Y[0], axis=-1)[times > cfg.analysis["warmup"]]))
            if events:
                n_returned += 1
                report[f"{key}.first_return"] = events[0].t_return
                report[f"{key}.first_return_distance"] = events[0].distance
                report[f"{key}.first_return_raw_distance"] = events[0].raw_distance
                report[f"{key}.recurrence"] = "returned"
            else:
                report[f"{key}.recurrence"] = "inconclusive: no return within horizon"
            for e in events:
                for col, val in zip(events_rows, (str(k), e.t_return, e.distance, e.raw_distance)):
                    col.append(val)
            dist_panel.append(svgplot.Series(times, np.linalg.norm(Y - Y[0], axis=-1), f"seed {k}"))
        write_trajectory_csv(out.path(f"trajectory_{k:03d}.csv"), sys, _seed_trajectory(sys, traj, k, H))
        trace_panel.append(svgplot.Series(fv[:, k, 0], fv[:, k, 1], f"seed {k}"))

    report["seeds_returned"] = n_returned
    write_series_csv(out.path("returns.csv"), ["seed", "t_return", "distance", "raw_distance"], events_rows)
    svgplot.write_svg(out.path("traces.svg"), [
        svgplot.Panel("Min player activations, one color per initialization", "f_1", "f_2", trace_panel),
        svgplot.Panel("Distance to the initial state in volume coordinates", "t", "distance", dist_panel),
    ])
    write_report(out.path("report.txt"), report)
    return RunResult(cfg.kind, out.dir, report, out.files)


# ----------------------------------------------------------------------------
# divergence_check

def run_divergence(cfg, out_dir):
    sys = _make_system(cfg)
    out = _Output(out_dir)
    rng = SplitMix64(cfg.seed)
    report = _base_report(cfg, sys)
    h = cfg.analysis["h"]
    centers = _centers(sys, cfg.init["center"])
    spread = cfg.init["spread"]
    ms = cfg.init["multiplier_spread"] or 1.0
    div_y, div_x = [], []
    for _ in range(cfg.analysis["points"]):
        params = np.array([c + rng.uniform(-spread, spread) for c in centers])
        lam, mu = rng.uniform(-ms, ms), rng.uniform(-ms, ms)
        x = np.concatenate([params, [lam, mu]])
        ctx = EnergyContext.for_system(sys, x, tol=cfg.analysis["quad_tol"])
        fv, gv = sys.activations(x)
        a, b, _, _ = volume_coordinates(ctx, fv, gv)
        y = np.concatenate([a, b, [lam, mu]])
        div_y.append(divergence_check(transformed_field(ctx, sys.game), y, h))
        div_x.append(divergence_check(lambda z: field_multi(sys, z), x, h))
    div_y, div_x = np.array(div_y), np.array(div_x)
    report["points"] = len(div_y)
    report["h"] = h
    report["max_abs_divergence_volume"] = float(np.max(np.abs(div_y)))
    report["max_abs_divergence_parameter"] = float(np.max(np.abs(div_x)))
    idx = np.arange(len(div_y), dtype=float)
    write_series_csv(out.path("divergence.csv"), ["point", "div_volume", "div_parameter"], [idx, div_y, div_x])
    svgplot.write_svg(out.path("divergence.svg"), [svgplot.Panel(
        "Divergence at random points", "point", "divergence",
        [svgplot.Series(idx, div_x, "parameter coordinates", kind="scatter"),
         svgplot.Series(idx, div_y, "volume coordinates", kind="scatter")])])
    write_report(out.path("report.txt"), report)
    return RunResult(cfg.kind, out.dir, report, out.files)


# ----------------------------------------------------------------------------
# spurious / spurious_discrete

def _corner_monotone(values, corner, start):
    d = np.abs(values[start:] - corner)
    return bool(np.all(np.diff(d) <= 1e-12))


def run_spurious(cfg, out_dir, discrete=False):
    out = _Output(out_dir)
    rng = SplitMix64(cfg.seed)
    alpha = cfg.discrete["alpha"]
    fixed = None
    if cfg.spurious is not None:
        s = cfg.spurious
        setup = build_spurious_system(s["p"], s["q"], s["v_sign"], margin=s["margin"], curvature=s["curvature"],
                                      v_magnitude=s["v_magnitude"], margin_f=s.get("margin_f"),
                                      margin_g=s.get("margin_g"))
        sys, fixed = setup.system, setup.fixed_point
        if cfg.init["mode"] == "disk":
            x0 = fixed + disk_perturbations(rng, cfg.init["count"], cfg.init["radius"])
        elif "theta" in cfg.init:
            x0 = initial_states(cfg, sys, rng)
        else:
            x0 = setup.seed[None, :]
    else:
        sys = _make_system(cfg)
        x0 = initial_states(cfg, sys, rng)
    report = _base_report(cfg, sys)
    report["mode"] = "discrete" if discrete else "continuous"
    report["seeds"] = len(x0)

    if fixed is not None:
        rep = fixed_point_report(sys, fixed, "discrete" if discrete else "continuous", alpha if discrete else None)
        fv, gv = sys.activations(fixed)
        report["fixed_point"] = fixed
        report["fixed_point.f"] = float(fv[0])
        report["fixed_point.g"] = float(gv[0])
        report["fixed_point.eigenvalues"] = np.real(rep.eigenvalues)
        if discrete:
            report["fixed_point.alpha"] = alpha
            report["fixed_point.moduli"] = np.abs(rep.eigenvalues)
            cont = fixed_point_report(sys, fixed)
            report["fixed_point.alpha_bound"] = float(-1.0 / np.min(np.real(cont.eigenvalues)))
        report["fixed_point.classification"] = rep.classification
        report["fixed_point.nash_consistent"] = rep.is_nash_consistent

    if discrete:
        steps = cfg.discrete["steps"]
        states = dgda(sys, x0, alpha, steps)
        times = alpha * np.arange(steps + 1)
        if not np.all(np.isfinite(states)):
            bad = int(np.nonzero(~np.all(np.isfinite(states), axis=(1, 2)))[0][0])
            report.update(status="numeric_failure", truncated=True, truncation_time=float(times[bad - 1]))
            write_report(out.path("report.txt"), report)
            raise NumericFailure("discrete iterates became non-finite",
                                 RunResult(cfg.kind, out.dir, report, out.files, "numeric_failure"))
        traj = Trajectory(times, states)
        report["alpha"] = alpha
        report["steps"] = steps
    else:
        traj = _integrate(cfg, sys, x0, out, report)
        report["integrator"] = type(cfg.method).__name__.lower()
        report["horizon"] = cfg.horizon

    times = traj.times
    fv, gv = sys.activations(traj.states)
    payoff = sys.observables(traj.states)["payoff"]
    final = traj.states[-1]
    start = int(cfg.analysis["transient"] * (len(times) - 1))
    tol = cfg.analysis["converge_tol"]
    n_conv = 0
    many = len(x0) > 10
    phase = []
    basin_cols = [[], [], [], [], [], [], []]
    for k in range(len(x0)):
        key = f"seed.{k}"
        ok, reason = _safety(sys, x0[k]) if (not many or k == 0) else (None, None)
        f_end, g_end = float(fv[-1, k, 0]), float(gv[-1, k, 0])
        if fixed is not None:
            dist = float(np.linalg.norm(final[k] - fixed))
            conv = dist <= tol
            n_conv += conv
            for col, v in zip(basin_cols, (float(k), x0[k, 0], x0[k, 1], final[k, 0], final[k, 1], dist, str(conv).lower())):
                col.append(v)
        if not many:
            report[f"{key}.theta0"] = x0[k, 0]
            report[f"{key}.phi0"] = x0[k, 1]
            report[f"{key}.safe"] = ok
            report[f"{key}.safety"] = reason
            report[f"{key}.final_f"] = f_end
            report[f"{key}.final_g"] = g_end
            report[f"{key}.final_payoff"] = float(payoff[-1, k])
            report[f"{key}.payoff_gap"] = abs(float(payoff[-1, k]) - sys.eq.value)
            report[f"{key}.nash_gap_f"] = abs(f_end - sys.p)
            report[f"{key}.nash_gap_g"] = abs(g_end - sys.q)
            if fixed is None:
                fmap = build_reparam(sys.f, [x0[k, 0]])
                gmap = build_reparam(sys.g, [x0[k, 1]])
                corner_f = min(fmap.range, key=lambda e: abs(e - f_end))
                corner_g = min(gmap.range, key=lambda e: abs(e - g_end))
                report[f"{key}.corner"] = [corner_f, corner_g]
                report[f"{key}.monotone_after_transient"] = (
                    _corner_monotone(fv[:, k, 0], corner_f, start) and _corner_monotone(gv[:, k, 0], corner_g, start))
        elif k == 0:
            report["safety"] = reason
        if not many or k == 0:
            ctx = _energy_context(sys, x0[k], cfg.analysis["quad_tol"]) if ok else None
            H = _energies(ctx, sys, traj.states[:, k])
            write_trajectory_csv(out.path(f"trajectory_{k:03d}.csv"), sys, _seed_trajectory(sys, traj, k, H))
        if k < 20:
            phase.append(svgplot.Series(fv[:, k, 0], gv[:, k, 0], f"seed {k}" if k < 6 else ""))
    if fixed is not None:
        report["converged"] = n_conv
        report["converge_tol"] = tol
        report["limit_f"] = float(np.median(fv[-1, :, 0]))
        report["limit_g"] = float(np.median(gv[-1, :, 0]))
        report["limit_nash_gap_f"] = abs(report["limit_f"] - sys.p)
        report["limit_nash_gap_g"] = abs(report["limit_g"] - sys.q)
        write_series_csv(out.path("basin.csv"), ["seed", "theta0", "phi0", "theta_final", "phi_final", "distance",
                                                 "converged"], basin_cols)
        fp = sys.activations(fixed)
        phase.append(svgplot.Series([float(fp[0][0])], [float(fp[1][0])], "stable fixed point", kind="scatter",
                                    color="#d62728"))
    phase.append(svgplot.Series([sys.p], [sys.q], "(p, q)", kind="scatter", color="#000000"))
    title = "Discrete GDA" if discrete else "Continuous GDA"
    svgplot.write_svg(out.path("phase.svg"), [
        svgplot.Panel(f"{title} in (f, g)", "f", "g", phase, xlim=(0, 1), ylim=(0, 1))])
    write_report(out.path("report.txt"), report)
    return RunResult(cfg.kind, out.dir, report, out.files)


# ----------------------------------------------------------------------------
# discrete_energy

def run_discrete_energy(cfg, out_dir):
    sys = _make_system(cfg)
    out = _Output(out_dir)
    rng = SplitMix64(cfg.seed)
    x0 = initial_states(cfg, sys, rng)[0]
    report = _base_report(cfg, sys)
    alpha, steps = cfg.discrete["alpha"], cfg.discrete["steps"]
    report["alpha"] = alpha
    report["steps"] = steps
    report["theta0"] = x0[0]
    report["phi0"] = x0[1]
    ok, reason = _safety(sys, x0)
    report["safe"] = ok
    report["safety"] = reason
    if not ok:
        report["status"] = "unsafe initialization: energy undefined"
        write_report(out.path("report.txt"), report)
        return RunResult(cfg.kind, out.dir, report, out.files, "unsafe")
    ctx = EnergyContext.for_system(sys, x0, tol=cfg.analysis["quad_tol"])
    audit = discrete_energy_audit(sys, ctx, x0, alpha, steps)
    n = len(audit.H)
    states = dgda(sys, x0, alpha, n - 1)
    report["truncated"] = audit.truncated
    report["audit"] = audit.report
    report["steps_done"] = audit.steps_done
    report["H0"] = float(audit.H[0])
    report["H_final"] = float(audit.H[-1])
    report["H_growth"] = float(audit.H[-1] - audit.H[0])
    report["min_forward_difference"] = audit.min_diff
    traj = Trajectory(alpha * np.arange(n), states)
    traj.observables.update(sys.observables(states))
    traj.observables["H"] = audit.H
    write_trajectory_csv(out.path("trajectory_000.csv"), sys, traj)
    k = np.arange(n, dtype=float)
    write_series_csv(out.path("energy.csv"), ["k", "H"], [k, audit.H])
    fv, gv = sys.activations(states)
    early = slice(0, min(n, 2000))
    svgplot.write_svg(out.path("energy.svg"), [
        svgplot.Panel("Energy H_k under discrete GDA", "k", "H", [svgplot.Series(k, audit.H, "H_k")]),
        svgplot.Panel("Early iterates", "k", "value", [
            svgplot.Series(k[early], fv[early, 0], "f"), svgplot.Series(k[early], gv[early, 0], "g")]),
    ])
    write_report(out.path("report.txt"), report)
    return RunResult(cfg.kind, out.dir, report, out.files)


RUNNERS = {
    "cycle2x2": run_cycle,
    "time_average": lambda cfg, out_dir: run_cycle(cfg, out_dir, averages_only=True),
    "recurrence_multi": run_recurrence,
    "divergence_check": run_divergence,
    "spurious": run_spurious,
    "spurious_discrete": lambda cfg, out_dir: run_spurious(cfg, out_dir, discrete=True),
    "discrete_energy": run_discrete_energy,
}


def run_experiment(cfg, out_dir=None):
    return RUNNERS[cfg.kind](cfg, out_dir or cfg.out)
