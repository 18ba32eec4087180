"""``rpslab solve|oracle|verify|probe --config FILE [--out DIR] [--check NAME]``.

Exit codes: 0 success, 1 a check or fit failed, 2 invalid input or config,
3 the solver aborted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .checks import REGISTRY, run_checks
from .errors import BoundaryContamination, InvalidInput, SolverAbort
from .evolution import EvolutionConfig, evolve
from .io import write_csv, write_field, write_json
from .oracles import growth_sweep, log_sum_bound, lowpass_gaussian_data
from .potentials import (
    Potential,
    annulus_bump_potential,
    constant_potential,
    mollified_delta,
    power_law_potential,
    shifted_annulus_potential,
    sign_jump,
    zero_potential,
)
from .regularity import DeltaRun, threshold_experiment
from .spectral import Field, Grid, sobolev_norm

log = logging.getLogger("rpslab")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_ABORT = 0, 1, 2, 3


def build_grid(sec: dict) -> Grid:
    return Grid(sec["half_width"], sec["size"])


def build_potential(grid: Grid, sec: dict) -> Potential:
    kind = sec["kind"]
    if kind == "zero":
        return zero_potential(grid)
    if kind == "constant":
        return constant_potential(grid, sec["value"])
    if kind == "mollified_delta":
        return mollified_delta(grid, sec["eps"], sec["mass"])
    if kind == "sign_jump":
        return sign_jump(grid)
    if kind == "annulus_bump":
        return annulus_bump_potential(grid, sec["M"], sec["r"])
    if kind == "shifted_annulus":
        return shifted_annulus_potential(grid, sec["M"], sec["N"], sec["r"])
    if kind == "power_law":
        return power_law_potential(grid, sec["gamma"], sec["delta0"])
    raise InvalidInput(f"unknown potential kind {kind!r}")


def build_data(grid: Grid, sec: dict) -> Field:
    kind = sec["kind"]
    if kind == "gaussian":
        w, c, k0 = sec["width"], sec["center"], sec["k0"]
        if not w > 0:
            raise InvalidInput("data width must be positive")
        return Field.from_function(grid, lambda x: np.exp(-(((x - c) / w) ** 2) + 1j * k0 * x))
    if kind == "lowpass_gaussian":
        return lowpass_gaussian_data(grid).physical()
    raise InvalidInput(f"unknown data kind {kind!r}")


def _out_dir(cfg: cfgmod.ExperimentConfig, override: str | None) -> Path:
    out = Path(override or cfg.section("run")["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(cfg: cfgmod.ExperimentConfig, out: Path) -> int:
    grid = build_grid(cfg.section("grid"))
    eta = build_potential(grid, cfg.section("potential"))
    u0 = build_data(grid, cfg.section("data"))
    ev = cfg.section("evolution")
    ecfg = EvolutionConfig(
        dt=ev["dt"],
        t_final=ev["t_final"],
        potential=eta,
        lam=ev["lam"],
        p=ev["p"],
        snapshot_stride=ev["snapshot_stride"],
        nonlinear=ev["nonlinear"],
        norm_orders=tuple(ev["norm_orders"]),
        decay_tol=ev["decay_tol"],
    )
    traj = evolve(u0, ecfg)
    keys = list(traj.diagnostics[0])
    write_csv(out / "diagnostics.csv", keys, ([row[k] for k in keys] for row in traj.diagnostics))
    snaps = []
    if ev["save_snapshots"]:
        for i, (t, u) in enumerate(traj):
            name = f"snapshot_{i:05d}.rpsf"
            write_field(out / name, u)
            snaps.append({"index": i, "t": t, "file": name})
    write_field(out / "initial.rpsf", u0)
    write_field(out / "final.rpsf", traj.final)
    write_json(
        out / "manifest.json",
        {"grid": {"half_width": grid.half_width, "size": grid.size}, "times": list(traj.times), "snapshots": snaps,
         "initial": "initial.rpsf", "final": "final.rpsf", "potential": eta.descriptor()},
    )
    final_norms = {"L2": sobolev_norm(traj.final, 0).value}
    for s in ecfg.norm_orders:
        final_norms[f"H^{s:g}"] = sobolev_norm(traj.final, s).value
    summary = {"t_final": traj.times[-1], "steps": traj.meta["steps"], "dt": traj.meta["dt"], "final_norms": final_norms,
               "mass_drift": traj.meta.get("mass_drift")}
    if ecfg.critical_exponent is not None:
        summary["critical_exponent"] = ecfg.critical_exponent
    write_json(out / "summary.json", summary)
    print(f"solve: {traj.meta['steps']} steps to t={traj.times[-1]:.6g}; mass drift {summary['mass_drift']}")
    return EXIT_OK


def cmd_oracle(cfg: cfgmod.ExperimentConfig, out: Path) -> int:
    sec = cfg.section("oracle")
    kind = sec["kind"]
    opts: dict = {"tolerance": sec["tolerance"]}
    if kind == "A":
        opts["s"] = 1.5
    elif kind == "B":
        opts.update(r=sec["r"], s=sec["s"])
    elif kind == "C":
        opts.update(n=sec["n"], r=sec["r"], s=sec["s"])
    else:
        raise InvalidInput(f"unknown oracle kind {kind!r}")
    if kind == "A":
        opts.pop("tolerance")
    table = growth_sweep(kind, sec["ladder"], **opts)
    table.to_csv(out / "growth.csv")
    summary = table.fit_summary()
    if kind == "A":
        summary["log_sum"] = [
            {"N0": int(p), "S": (rep := log_sum_bound(int(p))).s, "stated_bound": rep.bound, "corrected_bound": rep.corrected_bound}
            for p in table.parameters
        ]
    summary["points"] = [res.summary() for res in table.results]
    ok = table.passed and summary["positive_on_omega"]
    summary["pass"] = bool(ok)
    write_json(out / "fit.json", summary)
    print(f"oracle {kind}: slope {table.slope:.6g} residual {table.residual:.3g} -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(cfg: cfgmod.ExperimentConfig, out: Path, only: list[str] | None) -> int:
    names = list(only) if only else list(cfg.section("verify")["checks"])
    if "all" in names:
        names = list(REGISTRY)
    results = run_checks(names, cfg.check_params)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: value={r.value:.6g} tolerance={r.tolerance}")
    ok = all(r.passed for r in results)
    write_json(out / "report.json", {"pass": ok, "checks": [r.to_dict() for r in results]})
    if not ok:
        failed = ", ".join(r.name for r in results if not r.passed)
        print(f"verify: failing checks: {failed}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_probe(cfg: cfgmod.ExperimentConfig, out: Path) -> int:
    sec = cfg.section("probe")
    run = DeltaRun(
        half_width=sec["half_width"],
        size=sec["size"],
        t_final=sec["t_final"],
        dt=sec["dt"],
        dt_max=sec["dt_max"],
        dt_factor=sec["dt_factor"],
        mass=sec["mass"],
        decay_tol=sec["decay_tol"],
    )
    table = threshold_experiment(
        sec["family"], sec["s_list"], sec["ladder"], sec["ratio_threshold"], delta=run, r=sec["r"], n=sec["n"]
    )
    table.to_csv(out / "threshold.csv")
    summary = table.summary()
    failures = []
    for s in sec["expect_bounded"]:
        if s not in table.norms:
            raise InvalidInput(f"expect_bounded s={s} is not in s_list")
        if table.verdict(s) != "bounded":
            failures.append(f"H^{s:g} expected bounded, got {table.verdict(s)}")
    for s in sec["expect_growing"]:
        if s not in table.norms:
            raise InvalidInput(f"expect_growing s={s} is not in s_list")
        if table.verdict(s) != "growing":
            failures.append(f"H^{s:g} expected growing, got {table.verdict(s)}")
    tol = sec["jump_tolerance"]
    if tol is not None:
        if not table.jumps:
            raise InvalidInput("jump_tolerance needs the delta_eps family")
        errs = [j.relative_error for j in table.jumps]
        if not all(b < a for a, b in zip(errs, errs[1:])):
            failures.append("jump error does not decrease along the ladder")
        if errs[-1] >= tol:
            failures.append(f"final jump error {errs[-1]:.4g} >= {tol}")
    summary["expectation_failures"] = failures
    summary["pass"] = not failures
    write_json(out / "summary.json", summary)
    for s in table.s_list:
        print(f"probe H^{s:g}: {table.verdict(s)} (max/min {table.ratio(s):.4g}, last/first {table.growth(s):.4g})")
    for f in failures:
        print(f"probe: {f}", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rpslab", description="Rough-potential Schrodinger laboratory")
    ap.add_argument("command", choices=cfgmod.COMMANDS)
    ap.add_argument("--config", required=True, help="INI-style experiment config")
    ap.add_argument("--out", default=None, help="output directory (overrides [run] out)")
    ap.add_argument("--check", action="append", default=None, help="run only this named check (verify); repeatable")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config)
        if cfg.command != args.command:
            raise InvalidInput(f"config is for {cfg.command!r}, not {args.command!r}")
        if args.check and args.command != "verify":
            raise InvalidInput("--check only applies to verify")
        out = _out_dir(cfg, args.out)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "oracle":
            return cmd_oracle(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.check)
        return cmd_probe(cfg, out)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverAbort, BoundaryContamination) as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
