"""Scenario runner reproducing the propagation/localization phenomenology.

A scenario file (INI-style ``key = value`` sections) declares a curve, a
potential, a grid, the decision rules, and an expected verdict; running it
produces a :class:`Verdict` whose outcome is derived from the recorded
evidence by those rules alone.  Sweeps run grids of scenarios with an
append-only, resumable log.

All decision constants live in the scenario files (section ``[rules]``);
the parser defaults below only back missing keys.
"""

import configparser
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dfield
from pathlib import Path

import numpy as np

from . import geometry, potential as potential_mod, solver, spectral
from .errors import BudgetError, ConfigurationError
from .grids import Grid

DEFAULT_RULES = {
    "version": 1,
    "divergence_ceiling": 1e12,
    "functional_threshold": 50.0,
    "amplified_ceiling": 1e6,
    "bounded_ceiling": 1e2,
    "stabilization": 0.01,
    "conformance_tol": 1e-6,
    "tunnel_tol": 1e-8,
    "growth_window": 3,
    "probe_margin": 0.3,
    "halfwidth_band": 0.2,
}

OUTCOMES = ("propagation", "localization", "non-propagation-segment",
            "box-bounded", "line-propagation", "inconclusive", "unknown")


@dataclass
class Scenario:
    """Declarative description of one experiment."""

    name: str
    kind: str                      # rescaled | ladder | tunnel
    expected: str
    p: float
    alpha: float = 1.0
    eps_list: tuple = (0.2, 0.1, 0.05)
    k_ladder: tuple = solver.DEFAULT_LADDER
    horizon: float = 1.0
    case: str = "subcritical"
    gamma: float | None = None
    curve_cfg: dict = dfield(default_factory=dict)
    potential_cfg: dict = dfield(default_factory=dict)
    grid_cfg: dict = dfield(default_factory=dict)
    rules: dict = dfield(default_factory=lambda: dict(DEFAULT_RULES))

    def build_curve(self):
        return build_curve(self.curve_cfg)

    def build_profile(self):
        cfg = self.potential_cfg
        return potential_mod.DecayProfile(
            cfg.get("family", "inverse-square"),
            float(cfg.get("amplitude", 1.0)),
            float(cfg["exponent"]) if "exponent" in cfg else None)

    def build_potential(self, curve=None):
        cfg = self.potential_cfg
        dist = cfg.get("distance", "parabolic")
        if dist == "constant-floor":
            return potential_mod.Potential(None, dist,
                                           floor=float(cfg.get("floor", 1.0)))
        profile = self.build_profile()
        return potential_mod.Potential(profile, dist, curve=curve,
                                       gamma=float(cfg.get("gamma", 0.0)))

    def build_grid(self):
        return build_grid(self.grid_cfg)


def build_curve(cfg):
    """Curve from a config section: closed-form name + parameters."""
    form = cfg.get("form", "linear")
    n = int(cfg.get("samples", 513))
    horizon = float(cfg.get("horizon", 1.0))
    if form == "linear":
        velocity = _floats(cfg.get("velocity", "1.0"))
        v = velocity[0] if len(velocity) == 1 else velocity
        return geometry.Curve.straight(v, horizon, n=n)
    if form == "arc":
        speed = float(cfg.get("speed", 0.8))
        t_max = float(cfg.get("t_max", 0.25))
        return geometry.Curve.parametric(
            lambda s: speed * s, lambda s: 4.0 * t_max * s * (1.0 - s),
            horizon, n=n)
    if form == "boxed":
        return _boxed_curve(cfg, n)
    if form == "local-max":
        return _local_max_curve(cfg, n)
    if form == "initial-line":
        return geometry.Curve.initial_line(float(cfg.get("span", 4.0)),
                                           dim=int(cfg.get("dim", 2)), n=n)
    if form == "table":
        return geometry.Curve.from_table(cfg["path"])
    raise ConfigurationError(f"unknown curve form {form!r}")


def _boxed_curve(cfg, n):
    """Re-entry curve satisfying the box containment after its t maximum."""
    t_knots = [0.0, float(cfg.get("t_max", 0.25)), 0.12, 0.15, 0.1]
    tau_knots = [0.0, 0.4, 0.6, 0.8, 1.0]
    speed = float(cfg.get("speed", 2.0))
    wobble = float(cfg.get("wobble", 0.1))

    def ft(s):
        return float(np.interp(s, tau_knots, t_knots))

    def fx(s):
        if s <= 0.4:
            return speed * s
        return speed * 0.4 + wobble * math.sin(2.0 * math.pi * (s - 0.4) / 0.6)

    return geometry.Curve.parametric(fx, ft, 1.0, n=n)


def _local_max_curve(cfg, n):
    """Local strict maximum of t followed by a climb past the box window
    (the conjectural configuration; shipped as exploratory)."""
    t_knots = [0.0, float(cfg.get("t_max", 0.25)), 0.1, 0.2]
    tau_knots = [0.0, 0.4, 0.7, 1.0]
    speed = float(cfg.get("speed", 1.25))

    def ft(s):
        return float(np.interp(s, tau_knots, t_knots))

    def fx(s):
        return speed * min(s, 0.4) + 0.3 * max(s - 0.4, 0.0)

    return geometry.Curve.parametric(fx, ft, 1.0, n=n)


def build_grid(cfg):
    kind = cfg.get("kind", "box")
    dt = float(cfg.get("dt", 0.002))
    n = int(cfg.get("n", 301))
    if kind == "ball":
        return Grid.unit_ball(n, dt, ndim=int(cfg.get("ndim", 1)))
    if kind == "tunnel":
        return Grid.tunnel(float(cfg.get("length", 10.0)),
                           int(cfg.get("n_axis", 201)),
                           int(cfg.get("n_cross", 41)), dt)
    lo, hi = float(cfg.get("lo", -3.0)), float(cfg.get("hi", 3.0))
    return Grid.interval(lo, hi, n, dt, kind=kind)


def _floats(text):
    return tuple(float(tok) for tok in str(text).replace(",", " ").split())


# ----------------------------------------------------------------------
# scenario file I/O
# ----------------------------------------------------------------------
def load_scenario(path):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigurationError(f"cannot read scenario file {path}")
    sc = cp["scenario"]
    rules = dict(DEFAULT_RULES)
    if cp.has_section("rules"):
        for key, val in cp["rules"].items():
            rules[key] = float(val) if key != "version" else int(float(val))
    scenario = Scenario(
        name=sc.get("name", Path(path).stem),
        kind=sc.get("kind", "rescaled"),
        expected=sc.get("expected", "unknown"),
        p=sc.getfloat("p", 2.0),
        alpha=sc.getfloat("alpha", 1.0),
        eps_list=_floats(sc.get("eps", "0.2, 0.1, 0.05")),
        k_ladder=_floats(sc.get("k_ladder", "1e1,1e2,1e3,1e4,1e5,1e6")),
        horizon=sc.getfloat("horizon", 1.0),
        case=sc.get("case", "subcritical"),
        gamma=sc.getfloat("gamma", fallback=None),
        curve_cfg=dict(cp["curve"]) if cp.has_section("curve") else {},
        potential_cfg=dict(cp["potential"]) if cp.has_section("potential") else {},
        grid_cfg=dict(cp["grid"]) if cp.has_section("grid") else {},
        rules=rules)
    if scenario.expected not in OUTCOMES:
        raise ConfigurationError(f"unknown expected verdict {scenario.expected!r}")
    if scenario.kind not in ("rescaled", "ladder", "tunnel"):
        raise ConfigurationError(f"unknown scenario kind {scenario.kind!r}")
    return scenario


# ----------------------------------------------------------------------
# verdicts
# ----------------------------------------------------------------------
@dataclass
class Verdict:
    scenario: str
    kind: str
    outcome: str
    expected: str
    evidence: dict
    wall_time: float = 0.0

    @property
    def matches(self):
        if self.expected == "unknown":
            return True
        return self.outcome == self.expected


def run_scenario(scenario, budget=None):
    """Dispatch a scenario to the matching driver and derive its verdict."""
    start = time.perf_counter()
    if budget is not None:
        _check_budget(scenario, budget)
    if scenario.kind == "rescaled":
        outcome, evidence = _run_rescaled(scenario)
    elif scenario.kind == "ladder":
        outcome, evidence = _run_ladder(scenario)
    else:
        outcome, evidence = _run_tunnel(scenario)
    return Verdict(scenario=scenario.name, kind=scenario.kind,
                   outcome=outcome, expected=scenario.expected,
                   evidence=evidence, wall_time=time.perf_counter() - start)


def _check_budget(scenario, budget_seconds):
    """Coarse step-count screen naming the limiting parameter."""
    grid = scenario.build_grid()
    nodes = float(np.prod(grid.shape))
    if scenario.kind == "rescaled":
        steps = sum(scenario.alpha / (e * e) / grid.dt for e in scenario.eps_list)
    elif scenario.kind == "ladder":
        steps = len(scenario.k_ladder) * scenario.horizon / grid.dt
    else:
        steps = 1.0 / grid.dt
    est = steps * nodes * 2e-7
    if est > budget_seconds:
        raise BudgetError(
            f"estimated {est:.0f}s exceeds budget {budget_seconds}s",
            limiting_parameter="eps" if scenario.kind == "rescaled" else "dt")


def _run_rescaled(scenario):
    rules = scenario.rules
    curve = scenario.build_curve()
    profile = scenario.build_profile()
    grid = scenario.build_grid()
    psi0 = solver._ground_state_for(grid)
    per_eps = []
    for e in scenario.eps_list:
        res = solver.solve_rescaled(e, curve, scenario.p, scenario.alpha,
                                    grid, profile=profile, psi0=psi0,
                                    k=max(scenario.k_ladder))
        per_eps.append(res)
    log_amp = [r.log_amplified for r in per_eps]
    margins = [r.conformance_margin for r in per_eps]
    sigmas = [r.sigma_tau for r in per_eps]
    trace_measured = spectral.blowup_functional(
        "point", scenario.p, scenario.alpha, grid.ndim, psi0.lam, profile,
        scenario.eps_list, curve=curve, sigma=sigmas,
        threshold=rules["functional_threshold"])
    trace_analytic = spectral.blowup_functional(
        "point", scenario.p, scenario.alpha, grid.ndim, psi0.lam, profile,
        scenario.eps_list, curve=curve, sigma=0.0,
        threshold=rules["functional_threshold"])
    increasing = bool(np.all(np.diff(log_amp) > 0.0))
    top = math.log(rules["amplified_ceiling"])
    low = math.log(rules["bounded_ceiling"])
    conformant = all(m >= -rules["conformance_tol"] for m in margins)
    if increasing and log_amp[-1] > top and trace_measured.verdict == "diverging":
        outcome = "propagation"
    elif max(log_amp) <= low:
        outcome = "localization"
    else:
        outcome = "inconclusive"
    evidence = {
        "eps": list(scenario.eps_list),
        "log_amplified": log_amp,
        "conformance_margins": margins,
        "conformance_ok": conformant,
        "c1": [r.c1 for r in per_eps],
        "sigma_tau": sigmas,
        "beta_tau": [r.beta_tau for r in per_eps],
        "functional_measured": trace_measured.values.tolist(),
        "functional_verdict": trace_measured.verdict,
        "functional_analytic": trace_analytic.values.tolist(),
        "functional_analytic_verdict": trace_analytic.verdict,
        "lam0": psi0.lam,
    }
    return outcome, evidence


def derive_from_trace(trace, rules=None):
    """Outcome from the analytic functional alone (evidence sufficiency)."""
    rules = rules or DEFAULT_RULES
    return "propagation" if trace.verdict == "diverging" else "localization"


def _run_ladder(scenario):
    rules = scenario.rules
    curve = scenario.build_curve()
    pot = scenario.build_potential(curve)
    grid = scenario.build_grid()
    seg = geometry.classify_segments(curve)
    window = _probe_window(seg, rules["probe_margin"])
    maxima = []
    for k in scenario.k_ladder:
        run = solver.solve_uk(k, curve, pot, scenario.p, scenario.horizon,
                              grid, ceiling=rules["divergence_ceiling"])
        maxima.append(_window_max(run, window))
    m_lo, m_hi = maxima[-2], maxima[-1]
    stabilized = (m_lo > 0 and abs(m_hi - m_lo) / m_lo <= rules["stabilization"])
    if stabilized and seg.box is not None:
        outcome = "box-bounded"
    elif stabilized and "decreasing" in seg.labels:
        outcome = "non-propagation-segment"
    elif stabilized:
        outcome = "localization"
    else:
        outcome = "propagation"
    a, r0, tw = (None, None, None) if seg.box is None else seg.box
    evidence = {
        "k_ladder": list(scenario.k_ladder),
        "probe_maxima": maxima,
        "stabilization_gap": abs(m_hi - m_lo) / m_lo if m_lo > 0 else math.inf,
        "segments": [list(map(str, iv)) for iv in seg.intervals],
        "box_center": None if a is None else np.atleast_1d(a).tolist(),
        "box_radius": r0,
        "box_window": None if tw is None else list(tw),
        "probe_window": list(window) if window else None,
    }
    return outcome, evidence


def _probe_window(seg, margin):
    """Parameter window probed for boundedness: the box interval or the
    last decreasing interval, entered past a fractional margin to stay
    clear of the junction with the singular branch."""
    target = None
    for lo, hi, label in seg.intervals:
        if label == "box":
            target = (lo, hi)
        elif label == "decreasing":
            target = (lo, hi)
    if target is None:
        return None
    lo, hi = target
    return (lo + margin * (hi - lo), hi)


def _window_max(run, window):
    if window is None:  # monotone curve: on-curve probes of the whole run
        return float(np.max(run.probes)) if run.log_probes.size else 0.0
    lo, hi = window
    vals = [v for (tau, t, v) in run.tau_probes if lo - 1e-12 <= tau <= hi + 1e-12]
    return float(max(vals)) if vals else 0.0


def _run_tunnel(scenario):
    rules = scenario.rules
    profile = scenario.build_profile()
    grid = scenario.build_grid()
    res = solver.tunnel_run(scenario.eps_list, scenario.p, profile,
                            scenario.case, grid, gamma=scenario.gamma,
                            k=max(scenario.k_ladder))
    floors = [pe["log_floor_center"] for pe in res.per_eps]
    ratios = [pe["delta_measured"] / pe["delta_formula"] for pe in res.per_eps]
    growing = bool(np.all(np.diff(floors) > 0.0)) if len(floors) > 1 else True
    band = rules["halfwidth_band"]
    widths_ok = all(1.0 - band <= r <= 1.0 for r in ratios)
    conformant = res.conformance_min >= -rules["tunnel_tol"]
    if conformant and growing and widths_ok and res.c > 0:
        outcome = "line-propagation"
    else:
        outcome = "inconclusive"
    evidence = {
        "eps": list(scenario.eps_list),
        "log_floor_center": floors,
        "delta_formula": [pe["delta_formula"] for pe in res.per_eps],
        "delta_measured": [pe["delta_measured"] for pe in res.per_eps],
        "conformance_min": res.conformance_min,
        "calibration_a": res.a,
        "calibration_c": res.c,
        "lam_cross": res.lam,
        "gamma": scenario.gamma,
    }
    return outcome, evidence


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def emit_report(verdicts, out_dir, formats=("csv", "plot-script")):
    """Write verdict tables, per-scenario traces, and a gnuplot script.

    Output bytes are a pure function of the verdicts: fixed orderings,
    fixed float formatting, wall times excluded.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out / "verdicts.csv"
        with open(path, "w") as fh:
            fh.write("scenario,kind,outcome,expected,match\n")
            for v in verdicts:
                fh.write(f"{v.scenario},{v.kind},{v.outcome},{v.expected},"
                         f"{_fmt(bool(v.matches))}\n")
        written.append(path)
        for v in verdicts:
            tpath = out / f"{v.scenario}_trace.csv"
            with open(tpath, "w") as fh:
                if v.kind == "rescaled":
                    fh.write("eps,log_amplified,functional_measured,"
                             "functional_analytic,conformance_margin\n")
                    for i, e in enumerate(v.evidence["eps"]):
                        fh.write(f"{_fmt(e)},{_fmt(v.evidence['log_amplified'][i])},"
                                 f"{_fmt(v.evidence['functional_measured'][i])},"
                                 f"{_fmt(v.evidence['functional_analytic'][i])},"
                                 f"{_fmt(v.evidence['conformance_margins'][i])}\n")
                elif v.kind == "ladder":
                    fh.write("k,probe_max\n")
                    for k, m in zip(v.evidence["k_ladder"],
                                    v.evidence["probe_maxima"]):
                        fh.write(f"{_fmt(k)},{_fmt(m)}\n")
                else:
                    fh.write("eps,log_floor_center,delta_formula,delta_measured\n")
                    for i, e in enumerate(v.evidence["eps"]):
                        fh.write(f"{_fmt(e)},"
                                 f"{_fmt(v.evidence['log_floor_center'][i])},"
                                 f"{_fmt(v.evidence['delta_formula'][i])},"
                                 f"{_fmt(v.evidence['delta_measured'][i])}\n")
            written.append(tpath)
    if "plot-script" in formats:
        path = out / "plots.gp"
        with open(path, "w") as fh:
            fh.write("# gnuplot script generated by heatlab\n")
            fh.write("set datafile separator ','\nset key autotitle columnhead\n")
            for v in verdicts:
                fh.write(f"set title '{v.scenario} ({v.outcome})'\n")
                col = {"rescaled": 2, "ladder": 2, "tunnel": 2}[v.kind]
                logx = "set logscale x\n" if v.kind == "ladder" else "unset logscale\n"
                fh.write(logx)
                fh.write(f"plot '{v.scenario}_trace.csv' using 1:{col} "
                         f"with linespoints\npause -1\n")
        written.append(path)
    return written


# ----------------------------------------------------------------------
# sweeps with an append-only resumable log
# ----------------------------------------------------------------------
def load_sweep(path):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigurationError(f"cannot read sweep file {path}")
    sw = cp["sweep"]
    base_rel = sw.get("base", None)
    base = None
    if base_rel:
        base = load_scenario(Path(path).parent / base_rel)
    axes = {}
    for key in ("amplitude", "alpha", "p", "velocity"):
        if key in sw:
            axes[key] = _floats(sw[key])
    return {
        "name": sw.get("name", Path(path).stem),
        "mode": sw.get("mode", "analytic"),
        "base": base,
        "axes": axes,
        "budget_combos": sw.getint("budget_combos", 512),
        "lam0": sw.getfloat("lam0", 2.4674011002723395),
        "threshold": sw.getfloat("threshold", DEFAULT_RULES["functional_threshold"]),
    }


def _combo_key(combo):
    return json.dumps(combo, sort_keys=True)


def _analytic_verdict(combo, base, lam0, threshold):
    p = combo.get("p", base.p if base else 2.0)
    alpha = combo.get("alpha", base.alpha if base else 1.0)
    eps = base.eps_list if base else (0.2, 0.1, 0.05)
    profile = potential_mod.DecayProfile("inverse-square",
                                         combo.get("amplitude", 50.0))
    beta_sup = combo.get("velocity", 1.0)
    trace = spectral.blowup_functional("point", p, alpha, 1, lam0, profile,
                                       eps, beta_sup=beta_sup,
                                       threshold=threshold)
    return ("propagation" if trace.verdict == "diverging" else "localization",
            {"trace": trace.values.tolist()})


def sweep(spec, log_path, workers=1):
    """Run the Cartesian product of the axes, appending one fsynced JSON
    line per verdict; reruns skip combos already in the log."""
    axes = spec["axes"]
    names = sorted(axes)
    combos = [{}]
    for name in names:
        combos = [dict(c, **{name: v}) for c in combos for v in axes[name]]
    if len(combos) > spec["budget_combos"]:
        raise BudgetError(
            f"{len(combos)} combinations exceed budget {spec['budget_combos']}",
            limiting_parameter="axes")
    done = {}
    log_path = Path(log_path)
    if log_path.exists():
        with open(log_path) as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    done[_combo_key(rec["combo"])] = rec
    todo = [c for c in combos if _combo_key(c) not in done]
    results = []
    if spec["mode"] == "analytic" or spec["base"] is None:
        for combo in todo:
            outcome, extra = _analytic_verdict(combo, spec["base"],
                                               spec["lam0"], spec["threshold"])
            results.append({"combo": combo, "outcome": outcome, **extra})
    else:
        scenarios = [_scenario_for(spec["base"], combo) for combo in todo]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                verdicts = list(pool.map(run_scenario, scenarios))
        else:
            verdicts = [run_scenario(s) for s in scenarios]
        for combo, v in zip(todo, verdicts):
            results.append({"combo": combo, "outcome": v.outcome,
                            "evidence": {k: val for k, val in v.evidence.items()
                                         if isinstance(val, (int, float, str,
                                                             bool, list))}})
    with open(log_path, "a") as fh:
        for rec in results:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    ordered = [done.get(_combo_key(c)) or
               next(r for r in results if _combo_key(r["combo"]) == _combo_key(c))
               for c in combos]
    return ordered


def _scenario_for(base, combo):
    sc = Scenario(**{**base.__dict__})
    sc.potential_cfg = dict(base.potential_cfg)
    sc.curve_cfg = dict(base.curve_cfg)
    sc.rules = dict(base.rules)
    sc.name = base.name + "/" + "/".join(f"{k}={v:g}" for k, v in sorted(combo.items()))
    if "amplitude" in combo:
        sc.potential_cfg["amplitude"] = combo["amplitude"]
    if "alpha" in combo:
        sc.alpha = combo["alpha"]
    if "p" in combo:
        sc.p = combo["p"]
    if "velocity" in combo:
        sc.curve_cfg["velocity"] = str(combo["velocity"])
    sc.expected = "unknown"
    return sc


def write_sweep_summary(records, out_path):
    """Phase-diagram table: one row per combo, fixed ordering."""
    keys = sorted({k for rec in records for k in rec["combo"]})
    with open(out_path, "w") as fh:
        fh.write(",".join(keys + ["outcome"]) + "\n")
        for rec in sorted(records, key=lambda r: _combo_key(r["combo"])):
            row = [_fmt(rec["combo"].get(k, "")) for k in keys]
            fh.write(",".join(row + [rec["outcome"]]) + "\n")
