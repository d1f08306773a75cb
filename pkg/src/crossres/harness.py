"""Experiment orchestration: config loading, h-sweeps, prediction/oracle
pairing, convergence-slope fitting, and CSV emission."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .model import (CouplingSpec, PotentialSpec, ProblemSpec, ScalarCoefficient,
                    validate_assumptions)
from .oracle import (build_contour, discretize, resonances_in_window,
                     wronskian_roots)
from .semiclassics import predict


class ConfigError(Exception):
    """Malformed or inconsistent experiment configuration."""


class PairingError(Exception):
    """No oracle resonance could be paired with any prediction."""


@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    h_values: list
    N: int
    theta_values: list
    seeds_policy: str = "predictions"
    degenerate: bool = False

    def __post_init__(self):
        if any(h <= 0 for h in self.h_values):
            raise ConfigError("h values must be positive")
        self.h_values = sorted(self.h_values, reverse=True)
        if self.N < 512:
            raise ConfigError("N must be at least 512")
        if len(self.theta_values) < 1:
            raise ConfigError("at least one theta value required")


def _coefficient(node) -> ScalarCoefficient:
    if isinstance(node, (int, float)):
        return ScalarCoefficient("constant", {"value": float(node)})
    return ScalarCoefficient(node["kind"], dict(node.get("parameters", {})))


def load_config(path: str) -> ExperimentConfig:
    """Read the JSON experiment file (sections: potentials, coupling, window,
    contour, sweep)."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        pots = doc["potentials"]
        V1 = PotentialSpec(pots["V1"]["kind"], dict(pots["V1"]["parameters"]))
        V2 = PotentialSpec(pots["V2"]["kind"], dict(pots["V2"]["parameters"]))
        cpl = doc["coupling"]
        coupling = CouplingSpec(
            r0=_coefficient(cpl["r0"]), r1=_coefficient(cpl["r1"]),
            allow_degenerate=bool(cpl.get("allow_degenerate", False)))
        win = doc["window"]
        con = doc["contour"]
        sweep = doc["sweep"]
        problem = ProblemSpec(
            V1=V1, V2=V2, coupling=coupling,
            E0=float(win["E0"]), delta0=float(win["delta0"]),
            C0=float(win.get("C0", 1.0)),
            theta=float(con["theta"]), x_infty=float(con["x_infty"]),
            box=tuple(con["box"]),
            ramp_width=float(con.get("ramp_width", 1.0)))
        return ExperimentConfig(
            problem=problem,
            h_values=[float(h) for h in sweep["h_values"]],
            N=int(sweep["N"]),
            theta_values=[float(t) for t in con.get(
                "theta_values", [problem.theta])],
            seeds_policy=str(sweep.get("seeds_policy", "predictions")),
            degenerate=coupling.allow_degenerate)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc


@dataclass(frozen=True)
class ComparisonRow:
    h: float
    k: int
    method: str
    e_k: float
    C: float
    pred_re: float
    pred_im: float
    orc_re: float
    orc_im: float
    res_re: float
    res_im: float
    pair_dist: float


def ecs_resonances(config: ExperimentConfig, h: float,
                   stability_tol: float = 1e-6):
    """Shift-invert eigensolve at each theta; keep theta-stable eigenvalues.

    With a single theta configured the stability filter is skipped.
    """
    problem = config.problem
    per_theta = []
    for theta in config.theta_values:
        prob_t = ProblemSpec(
            V1=problem.V1, V2=problem.V2, coupling=problem.coupling,
            E0=problem.E0, delta0=problem.delta0, C0=problem.C0,
            theta=theta, x_infty=problem.x_infty, box=problem.box,
            ramp_width=problem.ramp_width)
        contour = build_contour(prob_t)
        op = discretize(prob_t, contour, config.N, h,
                        coupled=not config.degenerate)
        found = resonances_in_window(
            op, complex(problem.E0), problem.delta0 * 1.05,
            k=max(16, int(4 * problem.delta0 / (np.pi * h) + 8)))
        # keep only values in the physical half-window
        found = [r for r in found
                 if -problem.C0 * h <= r.E.imag <= 1e-7
                 and abs(r.E.real - problem.E0) <= problem.delta0]
        per_theta.append(found)
    base = per_theta[0]
    if len(per_theta) == 1:
        return base
    stable = []
    for r in base:
        if any(abs(r.E - s.E) < stability_tol for s in per_theta[1]):
            stable.append(r)
    return stable


def wronskian_resonances(config: ExperimentConfig, h: float):
    problem = config.problem
    contour = build_contour(problem)
    preds = predict(problem, h)
    seeds = [p.predicted for p in preds]
    roots = wronskian_roots(problem, h, seeds, contour)
    return [r for r in roots if r.grid_meta.get("converged")
            and abs(r.E.real - problem.E0) <= problem.delta0 * 1.05
            and -problem.C0 * h <= r.E.imag <= 1e-7]


def _pair(preds, oracle_vals):
    """Injective nearest-e_k matching, oracle values taken left to right."""
    taken = {}
    order = sorted(range(len(oracle_vals)), key=lambda i: oracle_vals[i].real)
    for i in order:
        E = oracle_vals[i]
        dists = sorted(
            ((abs(E.real - p.e_k), j) for j, p in enumerate(preds)
             if j not in taken.values()),
            key=lambda t: t[0])
        if dists:
            taken[i] = dists[0][1]
    return taken


def run_compare(config: ExperimentConfig, methods=("ecs", "wronskian"),
                h_values=None) -> list[ComparisonRow]:
    """Predict, run each oracle, pair, and tabulate residuals for every h."""
    rows = []
    hs = config.h_values if h_values is None else sorted(h_values, reverse=True)
    for h in hs:
        preds = predict(config.problem, h)
        for method in methods:
            if method == "ecs":
                found = ecs_resonances(config, h)
            elif method == "wronskian":
                found = wronskian_resonances(config, h)
            else:
                raise ConfigError(f"unknown oracle method {method!r}")
            if preds and not found:
                raise PairingError(
                    f"h={h} method={method}: no oracle resonances found "
                    f"(predictions: {len(preds)})")
            matches = _pair(preds, [r.E for r in found])
            for i in sorted(matches, key=lambda i: preds[matches[i]].k):
                p = preds[matches[i]]
                E = found[i].E
                rows.append(ComparisonRow(
                    h=h, k=p.k, method=method, e_k=p.e_k, C=p.width_coeff,
                    pred_re=p.predicted.real, pred_im=p.predicted.imag,
                    orc_re=E.real, orc_im=E.imag,
                    res_re=abs(E.real - p.e_k),
                    res_im=abs(E.imag + p.width_coeff * h * h),
                    pair_dist=abs(E - p.predicted)))
    return rows


def convergence_fit(table) -> dict:
    """Log-log slope fits of the residuals against h, plus per-row ratios.

    Grid indices k at different h never coincide (k grows like 1/h), so each
    h contributes its median residual over k to the fit.  Rows with residual
    below 1e-13 are dropped from the fits and counted in `dropped`.
    """
    by_h_re, by_h_im = {}, {}
    ratios = []
    dropped = {"re": 0, "im": 0}
    for row in table:
        if row.res_re >= 1e-13:
            by_h_re.setdefault(row.h, []).append(row.res_re)
        else:
            dropped["re"] += 1
        if row.res_im >= 1e-13:
            by_h_im.setdefault(row.h, []).append(row.res_im)
        else:
            dropped["im"] += 1
        ratios.append({"h": row.h, "k": row.k, "method": row.method,
                       "ratio": -row.orc_im / (row.h ** 2), "C": row.C})

    def fit(by_h):
        if len(by_h) < 2:
            return float("nan"), float("nan")
        hs = np.array(sorted(by_h))
        med = np.array([np.median(by_h[h]) for h in hs])
        slope, intercept = np.polyfit(np.log(hs), np.log(med), 1)
        return float(slope), float(intercept)

    slope_re, icpt_re = fit(by_h_re)
    slope_im, icpt_im = fit(by_h_im)
    return {"slope_re": slope_re, "slope_im": slope_im,
            "intercepts": {"re": icpt_re, "im": icpt_im},
            "ratios": ratios, "dropped": dropped}


_COLUMNS = ("h", "k", "method", "e_k", "C", "pred_re", "pred_im",
            "orc_re", "orc_im", "res_re", "res_im", "pair_dist")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def to_csv(table, out=None) -> str:
    """Serialize rows in the fixed schema with deterministic formatting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for row in sorted(table, key=lambda r: (-r.h, r.method, r.k)):
        w.writerow([_fmt(getattr(row, c)) for c in _COLUMNS])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def fixtures(config: ExperimentConfig) -> dict:
    """Derived constants of the configured problem, for regeneration on disk."""
    from .model import crossing_slopes, turning_points
    from .actions import action_set
    problem = config.problem
    tp = turning_points(problem, problem.E0)
    slopes = crossing_slopes(problem)
    acts = action_set(problem, complex(problem.E0))
    report = validate_assumptions(problem)
    return {
        "E0": problem.E0,
        "turning_points": {"a": float(np.real(tp.a)), "b": float(np.real(tp.b)),
                           "c": float(np.real(tp.c))},
        "crossing_slopes": {"tau1": slopes.tau1, "tau2": slopes.tau2,
                            "gamma": slopes.gamma},
        "actions_at_E0": {"A": float(np.real(acts.A)),
                          "B": float(np.real(acts.B)),
                          "S1L": float(np.real(acts.S1L)),
                          "S1R": float(np.real(acts.S1R)),
                          "S2L": float(np.real(acts.S2L)),
                          "dA_dE": float(np.real(acts.dA_dE))},
        "assumptions_ok": report.ok,
    }
