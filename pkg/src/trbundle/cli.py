"""Command-line front end: generate instances, run the solver, run diagnostics.

Exit codes: 0 success, 1 runtime failure (partial outputs are flushed),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    criticality_certificate,
    lambda_p,
    property_p_probe,
    remainder_constant_estimator,
)
from .driver import DriverError, RunConfig, enclosure_report, global_solve
from .problems import Family, default_start, generate, load_instance, oracle_of, save_instance

_F = "%.17g"


def _fmt(v) -> str:
    return _F % float(v)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad vector: {exc}") from None


def _out_dir(args) -> Path:
    base = args.out_dir or os.environ.get("TRBUNDLE_OUT_DIR") or "."
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    family = Family(args.family)
    instance = generate(family, n=args.n, m=args.m, seed=args.seed, p=args.p)
    save_instance(instance, args.out)
    print(f"wrote {args.out} (family={family.value}, n={instance.n}, m={instance.m}, "
          f"growth_order={instance.growth_order}, seed={instance.seed})")
    return 0


# ---------------------------------------------------------------------------
# run


def _write_iterates_csv(path: Path, trace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,i,f,decrease_ratio,gap,bundle_size,delta,dist_to_xstar,accepted\n")
        for r in trace:
            dist = _fmt(r.dist_to_xstar) if r.dist_to_xstar is not None else "nan"
            fh.write(",".join([
                str(r.j), str(r.i), _fmt(r.f), _fmt(r.decrease_ratio), _fmt(r.gap),
                str(r.bundle_size), _fmt(r.delta), dist, "1" if r.accepted else "0",
            ]) + "\n")


def _write_handoff(path: Path, handoff) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in handoff:
            coords = " ".join(_fmt(v) for v in entry.x)
            fh.write(f"{entry.j} {_fmt(entry.delta)} {_fmt(entry.f)} {coords}\n")


def _write_gnuplot(path: Path, csv_name: str, columns: str, title: str,
                   logscale: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write('set datafile separator ","\n')
        fh.write(f'set title "{title}"\n')
        if logscale:
            fh.write("set logscale y\n")
        fh.write(f'plot "{csv_name}" skip 1 using {columns} with linespoints notitle\n')


def _run_config_from_args(args, instance) -> RunConfig:
    p = args.p if args.p is not None else (instance.growth_order or 2)
    q = args.q if args.q is not None else p
    x0 = args.x0 if args.x0 is not None else default_start(instance)
    tau = args.tau
    if args.tau_ratio is not None:
        tau = [args.tau * args.tau_ratio ** (j - 1) for j in range(1, args.jmax + 1)]
    return RunConfig(
        x0=x0, p=p, q=q, delta0=args.delta0, delta_ratio=args.delta_ratio, tau=tau,
        sigma=args.sigma, cap=args.cap, j_max=args.jmax, memory_capacity=args.memory,
        seed=args.seed, max_inner=args.max_inner, builder_max_iter=args.builder_max_iter,
    )


def cmd_run(args) -> int:
    if args.from_manifest:
        with open(args.from_manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        ns = argparse.Namespace(**manifest["config"])
        ns.from_manifest = None
        ns.out_dir = args.out_dir or manifest["config"]["out_dir"]
        args = ns
    instance = load_instance(args.instance)
    oracle = oracle_of(instance)
    config = _run_config_from_args(args, instance)
    out = _out_dir(args)

    echo = {
        "instance": str(args.instance), "p": config.p, "q": config.q,
        "jmax": config.j_max, "delta0": config.delta0, "delta_ratio": config.delta_ratio,
        "tau": args.tau, "tau_ratio": args.tau_ratio, "sigma": config.sigma,
        "cap": config.cap, "memory": config.memory_capacity, "seed": config.seed,
        "max_inner": config.max_inner, "builder_max_iter": config.builder_max_iter,
        "x0": [float(v) for v in config.x0],
        "out_dir": str(out),
    }

    start = time.perf_counter()
    try:
        result = global_solve(oracle, config, x_star=instance.x_star)
    except DriverError as exc:
        _write_iterates_csv(out / "iterates.csv", exc.trace)
        _write_handoff(out / "handoff.txt", exc.handoff)
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start

    _write_iterates_csv(out / "iterates.csv", result.trace)
    _write_handoff(out / "handoff.txt", result.handoff)
    if instance.x_star is not None:
        _write_gnuplot(out / "plot_iterates.gp", "iterates.csv", "0:8",
                       "distance to the minimizer per iterate", logscale=True)

    summary = {
        "final_f": result.final_f,
        "final_x": [float(v) for v in result.final],
        "oracle_calls": result.oracle_calls,
        "wall_time_s": wall,
        "iterations": len(result.trace),
    }
    if instance.x_star is not None:
        levels = enclosure_report(result, instance.x_star)
        summary["enclosure"] = [bool(lv.enclosed) for lv in levels]
        summary["level_dist"] = [lv.dist for lv in levels]
    manifest = {
        "artifact_version": __version__,
        "config": echo,
        "instance_header": {
            "family": instance.family.value, "n": instance.n, "m": instance.m,
            "seed": instance.seed, "growth_order": instance.growth_order,
        },
        "summary": summary,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    enc = summary.get("enclosure")
    print(f"final f = {result.final_f:.12g} after {result.oracle_calls} oracle calls "
          f"({wall:.2f}s)" + (f", enclosure per level: {enc}" if enc is not None else ""))
    print(f"outputs in {out}")
    return 0


# ---------------------------------------------------------------------------
# diagnose


def cmd_diagnose(args) -> int:
    instance = load_instance(args.instance)
    oracle = oracle_of(instance)
    out = _out_dir(args)

    if args.mode == "plotdata":
        if instance.n != 1:
            print("plotdata mode needs a one-dimensional instance", file=sys.stderr)
            return 2
        lo, hi = (args.range if args.range is not None else (-0.25, 0.25))
        xs = np.linspace(lo, hi, args.points)
        fs = oracle.eval_values(xs[:, None])
        path = out / "plotdata.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,f\n")
            for xv, fv in zip(xs, fs):
                fh.write(f"{_fmt(xv)},{_fmt(fv)}\n")
        _write_gnuplot(out / "plotdata.gp", "plotdata.csv", "1:2", "objective graph")
        print(f"wrote {path} ({args.points} samples on [{lo}, {hi}])")
        return 0

    if args.mode == "lambda":
        if args.x is None or args.delta is None:
            print("lambda mode needs --x and --delta", file=sys.stderr)
            return 2
        p = args.p if args.p is not None else (instance.growth_order or 1)
        est = lambda_p(oracle, args.x, args.delta, p)
        path = out / "lambda.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("delta,p,lambda," + ",".join(f"x{i}" for i in range(instance.n)) + "\n")
            fh.write(",".join([_fmt(est.delta), str(est.p), _fmt(est.lambda_value)]
                              + [_fmt(v) for v in est.x]) + "\n")
        print(f"lambda^{p}(x, {args.delta:g}) = {est.lambda_value:.12g}  "
              f"(z* = {np.array2string(est.z_star, precision=6)}, method {est.method.value})")
        return 0

    if args.mode == "property-p":
        p = args.p if args.p is not None else (instance.growth_order or 1)
        if instance.x_star is None:
            print("property-p mode needs an instance with a known minimizer", file=sys.stderr)
            return 2
        inf_val, witnesses = property_p_probe(
            oracle, instance.x_star, p, box_radius=args.box_radius,
            num_samples=args.samples, seed=args.seed, keep_all=True)
        path = out / "property_p.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(f"x{i}" for i in range(instance.n)) + ",delta,lambda\n")
            for w in witnesses:
                fh.write(",".join([_fmt(v) for v in w.x] + [_fmt(w.delta), _fmt(w.lambda_value)]) + "\n")
        print(f"empirical inf of lambda^{p} over {len(witnesses)} probes: {inf_val:.6e}")
        print(f"wrote {path}")
        return 0

    if args.mode == "remainder-order":
        q = args.q if args.q is not None else 2
        x = args.x if args.x is not None else default_start(instance)
        est = remainder_constant_estimator(oracle, x, args.deltas, args.samples, q=q,
                                           seed=args.seed)
        path = out / "remainder_order.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("delta,max_gap\n")
            for d, m in zip(args.deltas, est.per_delta_max):
                fh.write(f"{_fmt(d)},{_fmt(m)}\n")
        proxy = " (value proxy: branches not enumerable)" if est.value_proxy else ""
        print(f"log-log slope = {est.slope:.4f}, envelope constant = {est.k_hat:.6e}{proxy}")
        print(f"wrote {path}")
        return 0

    if args.mode == "criticality":
        x = args.x if args.x is not None else default_start(instance)
        if args.epsilon is None:
            print("criticality mode needs --epsilon", file=sys.stderr)
            return 2
        val = criticality_certificate(oracle, x, args.epsilon,
                                      num_samples=args.samples, seed=args.seed)
        print(f"criticality certificate at epsilon={args.epsilon:g}: {val:.6e}")
        return 0

    print(f"unknown mode {args.mode}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trbundle",
        description="Trust-region bundle method with higher-order cutting-plane models")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a seeded problem instance file")
    g.add_argument("--family", required=True, choices=[f.value for f in Family])
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--m", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--p", type=int, default=None, help="growth order (sine-growth only)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run the solver on an instance file")
    r.add_argument("--instance")
    r.add_argument("--from-manifest", default=None,
                   help="re-run with the configuration echoed in a manifest.json")
    r.add_argument("--q", type=int, default=None)
    r.add_argument("--p", type=int, default=None)
    r.add_argument("--jmax", type=int, default=5)
    r.add_argument("--delta0", type=float, default=1.0)
    r.add_argument("--delta-ratio", dest="delta_ratio", type=float, default=0.1)
    r.add_argument("--tau", type=float, default=1e-5)
    r.add_argument("--tau-ratio", dest="tau_ratio", type=float, default=None,
                   help="use the vanishing schedule tau * tau_ratio^(j-1)")
    r.add_argument("--sigma", type=float, default=0.5)
    r.add_argument("--cap", type=float, default=0.1)
    r.add_argument("--memory", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-inner", dest="max_inner", type=int, default=10_000)
    r.add_argument("--builder-max-iter", dest="builder_max_iter", type=int, default=200)
    r.add_argument("--x0", type=_parse_vector, default=None)
    r.add_argument("--out-dir", dest="out_dir", default=None)
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("diagnose", help="brute-force diagnostics on an instance")
    d.add_argument("--instance", required=True)
    d.add_argument("--mode", required=True,
                   choices=["lambda", "property-p", "remainder-order", "criticality", "plotdata"])
    d.add_argument("--x", type=_parse_vector, default=None)
    d.add_argument("--delta", type=float, default=None)
    d.add_argument("--deltas", type=lambda s: [float(v) for v in s.split(",")],
                   default=[1e-1, 1e-2, 1e-3, 1e-4])
    d.add_argument("--p", type=int, default=None)
    d.add_argument("--q", type=int, default=None)
    d.add_argument("--epsilon", type=float, default=None)
    d.add_argument("--box-radius", dest="box_radius", type=float, default=0.25)
    d.add_argument("--samples", type=int, default=200)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--points", type=int, default=2001)
    d.add_argument("--range", type=lambda s: tuple(float(v) for v in s.split(",")), default=None)
    d.add_argument("--out-dir", dest="out_dir", default=None)
    d.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and not args.from_manifest and not args.instance:
        parser.error("run needs --instance (or --from-manifest)")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
