"""Named property and identity checks run by ``rpslab verify``.

Each check takes a dict of typed parameters (see ``Check.params``) and
returns a :class:`CheckResult`. Results carry only deterministic numbers,
so two runs of the same config produce identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import config as C
from .errors import InvalidInput
from .evolution import EvolutionConfig, evolve, picard_solve
from .littlewood_paley import (
    BERNSTEIN_CONSTANT,
    BERNSTEIN_PAIRS,
    CALIBRATION_GRID,
    bernstein_corpus,
    check_bernstein,
    dyadic_bands,
)
from .normal_form import (
    PHASE_RATIO_BOUNDS,
    NormalFormConfig,
    commutator_split_residual,
    decomposition_residual,
    nonresonant_factor_check,
)
from .oracles import log_sum_bound
from .potentials import mollified_delta, sign_jump
from .regularity import estimate_regularity, power_law_field
from .spectral import Field, Grid, free_propagate, l2_norm


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float | None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "value": float(self.value),
            "tolerance": self.tolerance,
            "details": self.details,
        }


@dataclass(frozen=True)
class Check:
    name: str
    fn: Callable[[dict], CheckResult]
    params: dict
    description: str

    def run(self, params: dict | None = None) -> CheckResult:
        full = {k: d for k, (_, d) in self.params.items()}
        full.update(params or {})
        return self.fn(self.name, full)


REGISTRY: dict[str, Check] = {}


def register(name: str, description: str, **params):
    def deco(fn):
        REGISTRY[name] = Check(name, fn, params, description)
        return fn

    return deco


def _gaussian(grid: Grid) -> Field:
    return Field.from_function(grid, lambda x: np.exp(-(x**2)))


@register(
    "spectral_exactness",
    "free evolution of exp(-x^2) against the closed form",
    size=(C.INT, 2**12),
    half_width=(C.FLOAT, 20.0),
    t=(C.FLOAT, 0.5),
    tol=(C.FLOAT, 1e-8),
)
def _spectral_exactness(name, p):
    grid = Grid(p["half_width"], p["size"])
    t = p["t"]
    u = free_propagate(_gaussian(grid), t)
    a = 1 + 4j * t
    exact = Field.from_function(grid, lambda x: a**-0.5 * np.exp(-(x**2) / a))
    err = l2_norm(u - exact) / l2_norm(exact)
    return CheckResult(name, err < p["tol"], err, p["tol"], {"K": grid.size, "L": grid.half_width, "t": t})


@register(
    "conservation",
    "mass drift and time reversal for a real mollified delta",
    size=(C.INT, 2**13),
    half_width=(C.FLOAT, 40.0),
    eps=(C.FLOAT, 0.1),
    t_final=(C.FLOAT, 1.0),
    dt=(C.FLOAT, 1e-3),
    drift_tol=(C.FLOAT, 1e-10),
    reversal_tol=(C.FLOAT, 1e-8),
    decay_tol=(C.OPT_FLOAT, None),
)
def _conservation(name, p):
    # Radiation off the delta reaches the box edge before t = 1, so the decay
    # guard is off by default; both properties hold on the periodic box.
    grid = Grid(p["half_width"], p["size"])
    eta = mollified_delta(grid, p["eps"])
    u0 = _gaussian(grid)
    common = dict(t_final=p["t_final"], potential=eta, snapshot_stride=50, decay_tol=p["decay_tol"], norm_orders=())
    fwd = evolve(u0, EvolutionConfig(dt=p["dt"], **common))
    back = evolve(fwd.final, EvolutionConfig(dt=-p["dt"], **common))
    drift = fwd.meta["mass_drift"]
    rev = l2_norm(back.final - u0) / l2_norm(u0)
    ok = drift < p["drift_tol"] and rev < p["reversal_tol"]
    return CheckResult(
        name, ok, max(drift / p["drift_tol"], rev / p["reversal_tol"]), 1.0, {"mass_drift": drift, "reversal_error": rev}
    )


@register(
    "solver_agreement",
    "Strang splitting against Picard iteration on the delta benchmark",
    size=(C.INT, 2**10),
    half_width=(C.FLOAT, 10.0),
    eps=(C.FLOAT, 0.1),
    t_final=(C.FLOAT, 0.1),
    dt=(C.FLOAT, 1e-4),
    tol=(C.FLOAT, 1e-6),
    decay_tol=(C.OPT_FLOAT, None),
)
def _solver_agreement(name, p):
    grid = Grid(p["half_width"], p["size"])
    eta = mollified_delta(grid, p["eps"])
    cfg = EvolutionConfig(
        dt=p["dt"], t_final=p["t_final"], potential=eta, snapshot_stride=10**9, norm_orders=(), decay_tol=p["decay_tol"]
    )
    u0 = _gaussian(grid)
    a = evolve(u0, cfg).final
    b = picard_solve(u0, cfg, iterations=20, tol=1e-13)
    dist = l2_norm(a - b.final) / l2_norm(b.final)
    return CheckResult(name, dist < p["tol"], dist, p["tol"], {"picard_iterations": b.meta["iterations"]})


@register(
    "bernstein",
    "band-limited norm ratios on the frozen corpus stay below C_B",
    count=(C.INT, 50),
    seed=(C.INT, 20240611),
    constant=(C.FLOAT, BERNSTEIN_CONSTANT),
)
def _bernstein(name, p):
    worst = 0.0
    total = 0
    for f in bernstein_corpus(CALIBRATION_GRID, p["count"], p["seed"]):
        for n in dyadic_bands(CALIBRATION_GRID)[:-1]:
            for pp, q in BERNSTEIN_PAIRS:
                rep = check_bernstein(f, n, pp, q)
                if rep.defined:
                    total += 1
                    worst = max(worst, rep.ratio)
    return CheckResult(name, worst <= p["constant"], worst, p["constant"], {"ratios": total})


@register(
    "phase_ratio",
    "phase ratio against the min-power law on a dyadic sweep",
    points_per_axis=(C.INT, 142),
    betas=(C.FLOATS, (0.5, 0.9, 0.99)),
    c1=(C.FLOAT, PHASE_RATIO_BOUNDS[0]),
    c2=(C.FLOAT, PHASE_RATIO_BOUNDS[1]),
)
def _phase_ratio(name, p):
    if p["c1"] < 1 / 8 or p["c2"] > 8:
        raise InvalidInput("phase_ratio constants must satisfy c1 >= 1/8 and c2 <= 8")
    rep = nonresonant_factor_check(p["betas"], (), (), p["points_per_axis"], (p["c1"], p["c2"]))
    lo = min(r["min"] for r in rep.beta_ranges.values())
    return CheckResult(name, rep.law_pass, lo, p["c1"], {"ranges": rep.beta_ranges, "c1": p["c1"], "c2": p["c2"]})


@register(
    "min_power_integral",
    "quadrature of int min{|xi|^g, |z|^g} dz against its closed form",
    gammas=(C.FLOATS, (-1.5, -2.0, -3.0)),
    xis=(C.FLOATS, (1.0, 4.0, 16.0)),
    tol=(C.FLOAT, 1e-6),
)
def _min_power(name, p):
    rep = nonresonant_factor_check((), p["gammas"], p["xis"], integral_tol=p["tol"])
    worst = max((r["rel_error"] for r in rep.integrals), default=0.0)
    return CheckResult(name, rep.integral_pass, worst, p["tol"], {"rows": rep.integrals})


@register(
    "log_sum_bound",
    "direct summation of the Omega log sum against its lower bound",
    n0_min=(C.INT, 16),
    n0_max=(C.INT, 512),
    constant=(C.STR, "corrected"),
)
def _log_sum(name, p):
    if p["constant"] not in ("stated", "corrected"):
        raise InvalidInput("log_sum_bound constant must be 'stated' or 'corrected'")
    rows, ok, margin = [], True, np.inf
    n0 = p["n0_min"]
    while n0 <= p["n0_max"]:
        rep = log_sum_bound(n0)
        bound = rep.bound if p["constant"] == "stated" else rep.corrected_bound
        ok &= rep.s >= bound
        margin = min(margin, rep.s / bound)
        rows.append({"N0": n0, "S": rep.s, "stated_bound": rep.bound, "corrected_bound": rep.corrected_bound})
        n0 *= 2
    return CheckResult(name, bool(ok), margin, 1.0, {"constant": p["constant"], "rows": rows})


@register(
    "commutator_split",
    "D^s(eta w) split into main and commutator parts, exact on the lattice",
    size=(C.INT, 256),
    half_width=(C.FLOAT, 16.0),
    count=(C.INT, 10),
    seed=(C.INT, 20240611),
    s_values=(C.FLOATS, (1.25, 1.45, 2.0)),
    beta=(C.FLOAT, 0.95),
    tol=(C.FLOAT, 1e-10),
)
def _commutator(name, p):
    grid = Grid(p["half_width"], p["size"])
    potentials = [mollified_delta(grid, 0.5), sign_jump(grid)]
    worst = 0.0
    for w in bernstein_corpus(grid, p["count"], p["seed"]):
        for eta in potentials:
            for s in p["s_values"]:
                worst = max(worst, commutator_split_residual(w, eta, s, p["beta"]).residual)
                worst = max(worst, commutator_split_residual(w, eta, s, p["beta"], n0=16).residual)
    return CheckResult(name, worst <= p["tol"], worst, p["tol"], {"cases": p["count"] * len(potentials) * len(p["s_values"]) * 2})


@register(
    "decomposition_residual",
    "normal-form rewriting of <nabla>^s u(t) and its dt convergence",
    size=(C.INT, 2**9),
    half_width=(C.FLOAT, 10.0),
    eps=(C.FLOAT, 0.2),
    dt=(C.FLOAT, 1e-3),
    t=(C.FLOAT, 0.1),
    s=(C.FLOAT, 2.0),
    n0=(C.INT, 16),
    tol=(C.FLOAT, 1e-3),
    ratio_lo=(C.FLOAT, 3.0),
    ratio_hi=(C.FLOAT, 5.0),
)
def _decomposition(name, p):
    grid = Grid(p["half_width"], p["size"])
    eta = mollified_delta(grid, p["eps"])
    u0 = _gaussian(grid)
    nf = NormalFormConfig(s=p["s"], n0=p["n0"])
    res = []
    for dt in (p["dt"], p["dt"] / 2):
        traj = evolve(u0, EvolutionConfig(dt=dt, t_final=p["t"], potential=eta, decay_tol=None, norm_orders=()))
        res.append(decomposition_residual(traj, eta, nf).residual)
    ratio = res[0] / res[1] if res[1] > 0 else np.inf
    ok = res[0] < p["tol"] and p["ratio_lo"] <= ratio <= p["ratio_hi"]
    return CheckResult(name, ok, res[0], p["tol"], {"residual_dt": res[0], "residual_half_dt": res[1], "halving_ratio": ratio})


@register(
    "regularity_calibration",
    "band-energy slope recovers sigma - 1/2 on <xi>^{-sigma} spectra",
    size=(C.INT, 2**14),
    half_width=(C.FLOAT, 50.0),
    sigmas=(C.FLOATS, (1.5, 2.0, 2.5, 3.0)),
    tol=(C.FLOAT, 0.1),
)
def _regularity(name, p):
    grid = Grid(p["half_width"], p["size"])
    rows, worst = [], 0.0
    for sigma in p["sigmas"]:
        est = estimate_regularity(power_law_field(grid, sigma))
        err = abs(est.s_est - (sigma - 0.5))
        worst = max(worst, err)
        rows.append({"sigma": sigma, "s_est": est.s_est, "window": list(est.window)})
    return CheckResult(name, worst <= p["tol"], worst, p["tol"], {"rows": rows})


def run_checks(names, params_for: Callable[[str], dict[str, Any]] | None = None) -> list[CheckResult]:
    if not names or "all" in names:
        names = list(REGISTRY)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise InvalidInput(f"unknown checks: {', '.join(unknown)}")
    return [REGISTRY[n].run(params_for(n) if params_for else None) for n in names]
