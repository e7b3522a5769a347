"""Command-line interface.

Exit codes: 0 success, 1 validation or check failure, 2 I/O failure.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, checks, isovector, model
from .config import (MANIFEST_VERSION, ConfigError, Options, RunConfig, default_output_dir,
                     dump_json, load_config)
from .model import ParameterError, derive
from .sde import hitting_stats, simulate_ou, simulate_s, simulate_x, simulate_z

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


def _fmt(x: float) -> str:
    return repr(float(x))


def write_paths_csv(paths, path: Path):
    buf = io.StringIO()
    buf.write("path_id,t,value,hit\n")
    times = [_fmt(t) for t in paths.times]
    for i in range(paths.n_paths):
        ht = paths.hit_time[i]
        row = paths.values[i]
        for j, ts in enumerate(times):
            hit = 1 if (not math.isnan(ht) and ht <= paths.times[j]) else 0
            buf.write(f"{i},{ts},{_fmt(row[j])},{hit}\n")
    path.write_text(buf.getvalue())


def cmd_simulate(cfg: RunConfig, out: Path, workers=None) -> tuple[dict, bool, list]:
    proc = cfg.options.process
    if proc == "x":
        ps = simulate_x(cfg.model, cfg.sim, workers)
    elif proc == "z":
        ps = simulate_z(cfg.model, cfg.sim, workers)
    elif proc == "s":
        ps = simulate_s(cfg.model, cfg.sim, workers)
    else:
        dp = derive(cfg.model)
        ps = simulate_ou(dp, dp.z0, cfg.sim, workers)
    write_paths_csv(ps, out / "paths.csv")
    dump_json(hitting_stats(ps).to_dict(), out / "hitting.json")
    return {}, True, ["paths.csv", "hitting.json"]


def density_grid(dp, opts: Options) -> np.ndarray:
    t = opts.t
    if abs(dp.delta - 3) <= 1e-9:
        lo, hi = 0.0, 10.0 * float(model.delta3_sigma(dp, t))
    else:
        m, sd = float(model.ou_mean(dp, t)), math.sqrt(float(model.ou_variance(dp, t)))
        lo, hi = m - 10.0 * sd, m + 10.0 * sd
    lo = lo if opts.q_min is None else opts.q_min
    hi = hi if opts.q_max is None else opts.q_max
    return np.linspace(lo, hi, opts.n_q)


def cmd_density(cfg: RunConfig, out: Path, workers=None) -> tuple[dict, bool, list]:
    dp = derive(cfg.model)
    if abs(dp.delta - 1) <= 1e-9:
        f = model.density_delta1
    elif abs(dp.delta - 3) <= 1e-9:
        f = model.density_delta3
    else:
        raise ValueError(f"no closed-form density for delta = {dp.delta:g}: "
                         "explicit densities exist only for delta in {1, 3}")
    q = density_grid(dp, cfg.options)
    rho = np.atleast_1d(f(dp, cfg.options.t, q))
    lines = ["q,rho"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(q, rho)]
    (out / "density.csv").write_text("\n".join(lines) + "\n")
    return {"trapezoid_mass": float(np.trapezoid(rho, q))}, True, ["density.csv"]


def cmd_isovector(cfg: RunConfig, out: Path, workers=None) -> tuple[dict, bool, list]:
    dp = derive(cfg.model)
    pot = model.Potential(0.0 if dp.c_is_zero else dp.big_c, dp.big_d)
    case = isovector.classify(pot)
    t_grid, q_grid = np.linspace(0.0, 2.0, 21), np.linspace(0.5, 3.0, 26)
    residuals = []
    for i in range(case.dimension):
        coeffs = [1.0 if j == i else 0.0 for j in range(case.dimension)]
        sol = isovector.solve_auxiliary(pot, dp.theta, coeffs)
        residuals.append(isovector.auxiliary_residual(sol, pot, dp.theta, t_grid, q_grid).to_dict())
    report = {"C": dp.big_c, "D": dp.big_d, "delta": dp.delta, "theta": dp.theta,
              "case": case.tag.value, "dimension": case.dimension, "epsilon": case.epsilon,
              "basis_residuals": residuals}
    if case.tag is isovector.CaseTag.C_NONZERO_D_ZERO:
        report["canonical_basis"] = {
            "M1": {"N_t": "t^2", "N_q": "t*q", "N_S": "(theta^2*t - q^2)/2"},
            "M2": {"N_t": "t", "N_q": "q/2", "N_S": "0"},
            "M3": {"N_t": "1", "N_q": "0", "N_S": "0"},
            "M4": {"N_t": "0", "N_q": "0", "N_S": "1"},
        }
    dump_json(report, out / "isovector.json")
    return {"dimension": case.dimension}, all(r["passed"] for r in residuals), ["isovector.json"]


def cmd_check(cfg: RunConfig, out: Path, suites, workers=None) -> tuple[dict, bool, list]:
    summary = {}
    ok = True
    files = []
    for name in suites:
        res = checks.run_suite(name, cfg.options, int(cfg.sim.seed), workers)
        files.append(f"check_{name}.json")
        dump_json(res, out / files[-1])
        summary[name] = {"passed": res["passed"], "gating": res["gating"]}
        if res["gating"] and not res["passed"]:
            ok = False
    return summary, ok, files


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def execute(command: str, cfg: RunConfig, suites=(), workers=None, out: Path | None = None) -> int:
    out = Path(cfg.output_dir) if out is None else out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create output directory {out}: {e}", file=sys.stderr)
        return EXIT_IO
    start = time.perf_counter()
    try:
        if command == "simulate":
            summary, ok, files = cmd_simulate(cfg, out, workers)
        elif command == "density":
            summary, ok, files = cmd_density(cfg, out, workers)
        elif command == "isovector":
            summary, ok, files = cmd_isovector(cfg, out, workers)
        elif command == "check":
            unknown = [s for s in suites if s not in checks.SUITES]
            if unknown:
                print(f"error: unknown check suite(s): {', '.join(unknown)}; "
                      f"choose from {', '.join(checks.SUITES)}", file=sys.stderr)
                return EXIT_FAIL
            summary, ok, files = cmd_check(cfg, out, suites, workers)
        else:
            raise ValueError(f"unknown command {command!r}")
    except OSError as e:
        print(f"error: I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    duration = time.perf_counter() - start
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "suites": list(suites),
        "config": cfg.to_dict(),
        "derived": derive(cfg.model).to_dict(),
        "version": __version__,
        "seed": int(cfg.sim.seed),
        "duration_s": duration,
        "checks": summary,
        "outputs": {name: _sha256(out / name) for name in sorted(files)},
    }
    try:
        dump_json(manifest, out / "manifest.json")
    except OSError as e:
        print(f"error: cannot write manifest: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if ok else EXIT_FAIL


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="run config or manifest JSON")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r0", type=float)
    p.add_argument("--n-paths", type=int)
    p.add_argument("--t-max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--scheme", choices=["euler_full_truncation", "exact_besq_timechange"])
    p.add_argument("--out", help="output directory (default: $AFFINE_BERNSTEIN_OUT, else ./out)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (output does not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="affine-bernstein",
                                 description="Affine short-rate models as Bernstein processes")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="simulate paths, write paths.csv and hitting.json")
    _add_common(p)
    p.add_argument("--process", choices=["x", "z", "ou", "s"])
    p = sub.add_parser("check", help="run validation suites")
    _add_common(p)
    p.add_argument("suites", nargs="+", help=f"one or more of: {', '.join(checks.SUITES)}, all")
    p.add_argument("--delta", type=float, help="density suite: 1 or 3")
    p = sub.add_parser("density", help="tabulate the closed-form density (delta 1 or 3)")
    _add_common(p)
    p.add_argument("--t", type=float, help="time at which the density is tabulated")
    p = sub.add_parser("isovector", help="classify the isovector algebra of the model")
    _add_common(p)
    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            cfg, manifest = load_config(args.manifest)
            if manifest is None:
                raise ConfigError(f"{args.manifest} is not a manifest")
            out = Path(args.out) if args.out else None
            return execute(manifest["command"], cfg, manifest.get("suites", []), args.threads, out)
        if args.config:
            cfg, _ = load_config(args.config)
        else:
            cfg = RunConfig(output_dir=default_output_dir())
        opts = {}
        if args.command == "simulate":
            opts["process"] = args.process
        if args.command == "check":
            opts["delta"] = args.delta
        if args.command == "density":
            opts["t"] = args.t
        cfg = cfg.with_overrides(
            model={"alpha": args.alpha, "beta": args.beta, "phi": args.phi, "lambda": args.lam, "r0": args.r0},
            sim={"n_paths": args.n_paths, "t_max": args.t_max, "dt": args.dt, "seed": args.seed,
                 "scheme": args.scheme},
            options=opts, output_dir=args.out)
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    except (json.JSONDecodeError, ConfigError, ParameterError, ValueError, TypeError, KeyError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_FAIL
    suites = []
    if args.command == "check":
        suites = list(checks.SUITES) if "all" in args.suites else list(args.suites)
    return execute(args.command, cfg, suites, args.threads)


if __name__ == "__main__":
    sys.exit(main())
