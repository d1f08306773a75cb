"""Command-line interface for the resonance-width toolkit."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .harness import (convergence_fit, ecs_resonances, fixtures, load_config,
                      run_compare, to_csv, wronskian_resonances)
from .microlocal import monodromy_residual, width_from_green
from .model import validate_assumptions
from .semiclassics import predict, width_coefficient


def _emit(text: str, out: str | None):
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_data(rows, plot_dir: str):
    os.makedirs(plot_dir, exist_ok=True)
    by = {}
    for r in rows:
        by.setdefault((r.method, r.h), []).append(r)
    for (method, h), group in sorted(by.items()):
        path = os.path.join(plot_dir, f"widths_{method}_h{h:g}.dat")
        with open(path, "w") as fh:
            fh.write("# e_k  neg_im_over_h2  C\n")
            for r in sorted(group, key=lambda r: r.k):
                fh.write(f"{r.e_k:.17g} {-r.orc_im / h ** 2:.17g} {r.C:.17g}\n")


def cmd_validate(args) -> int:
    config = load_config(args.config)
    report = validate_assumptions(config.problem)
    print(report.summary(), file=sys.stderr)
    return 0 if report.ok else 1


def cmd_predict(args) -> int:
    config = load_config(args.config)
    lines = ["k,e_k,C,pred_re,pred_im"]
    for p in predict(config.problem, args.h):
        lines.append(f"{p.k},{p.e_k:.17g},{p.width_coeff:.17g},"
                     f"{p.predicted.real:.17g},{p.predicted.imag:.17g}")
    _emit("\n".join(lines) + "\n", args.out)
    print(f"{len(lines) - 1} predictions at h={args.h}", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    config = load_config(args.config)
    if args.method == "ecs":
        found = ecs_resonances(config, args.h)
    else:
        found = wronskian_resonances(config, args.h)
    lines = ["re,im,residual,method"]
    for r in sorted(found, key=lambda r: r.E.real):
        lines.append(f"{r.E.real:.17g},{r.E.imag:.17g},"
                     f"{r.residual:.3g},{r.method}")
    _emit("\n".join(lines) + "\n", args.out)
    print(f"{len(found)} resonances (method={args.method}, h={args.h})",
          file=sys.stderr)
    return 0 if found else 1


def cmd_compare(args) -> int:
    config = load_config(args.config)
    rows = run_compare(config)
    _emit(to_csv(rows), args.out)
    if args.plot_data:
        _plot_data(rows, args.plot_data)
    fit = convergence_fit(rows)
    print(f"{len(rows)} pairings; slope_re={fit['slope_re']:.3f}, "
          f"slope_im={fit['slope_im']:.3f}", file=sys.stderr)
    return 0 if rows else 1


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    rows = run_compare(config)
    _emit(to_csv(rows), args.out)
    if args.plot_data:
        _plot_data(rows, args.plot_data)
    fit = convergence_fit(rows)
    checks = {
        "pairings_nonempty": bool(rows),
        "slope_re_ge_1.8": fit["slope_re"] >= 1.8,
        "slope_im_ge_2.1": fit["slope_im"] >= 2.1,
    }
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return 0 if all(checks.values()) else 1


def cmd_consistency(args) -> int:
    config = load_config(args.config)
    problem = config.problem
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    n = args.draws
    for _ in range(n):
        E = problem.E0 + (rng.random() - 0.5) * 2 * problem.delta0
        h = 0.005 + 0.095 * rng.random()
        C = width_coefficient(problem, E, h)
        w = width_from_green(problem, E, h)
        scale = max(abs(C * h * h), 1e-300)
        worst = max(worst, abs(w - C * h * h) / scale)
        res = monodromy_residual(problem, E, h)
        _ = abs(res)
    ok = worst < 1e-10
    print(f"{'PASS' if ok else 'FAIL'} width identity over {n} draws; "
          f"worst relative error {worst:.3e}", file=sys.stderr)
    return 0 if ok else 1


def cmd_fixtures(args) -> int:
    config = load_config(args.config)
    data = fixtures(config)
    _emit(json.dumps(data, indent=2, sort_keys=True) + "\n", args.out)
    print("fixtures regenerated", file=sys.stderr)
    return 0 if data["assumptions_ok"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crossres",
        description="Resonance widths for a 2x2 system above a level crossing")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **extra):
        p = sub.add_parser(name)
        p.add_argument("config")
        p.add_argument("--out", default=None)
        p.add_argument("--plot-data", dest="plot_data", default=None)
        for flag, kw in extra.items():
            p.add_argument(flag, **kw)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate)
    add("predict", cmd_predict, **{"--h": dict(type=float, required=True)})
    add("oracle", cmd_oracle, **{
        "--h": dict(type=float, required=True),
        "--method": dict(choices=["ecs", "wronskian"], default="ecs")})
    add("compare", cmd_compare)
    add("sweep", cmd_sweep)
    add("consistency", cmd_consistency, **{
        "--draws": dict(type=int, default=200),
        "--seed": dict(type=int, default=0)})
    add("fixtures", cmd_fixtures)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
