"""Time integration of i u_t + u_xx + eta u = lam |u|^p u.

The primary integrator is Strang splitting: half a free step, a pointwise
phase ``exp(i dt (eta - lam |u|^p))``, half a free step. The potential only
ever enters through that phase, so no derivative of ``eta`` is taken.
``picard_solve`` iterates the Duhamel formula (linear case) as an
independent cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BoundaryContamination, InvalidInput, NonContraction, SolverAbort
from .potentials import Potential
from .spectral import Field, Grid, check_decay, free_propagate, sobolev_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    potential: Potential | None = None
    lam: float = 0.0
    p: float = 0.0
    snapshot_stride: int = 1
    nonlinear: bool = False
    norm_orders: tuple[float, ...] = (1.0,)
    decay_tol: float | None = 1e-8
    regularity_threshold: float | None = None  # s_r metadata for nonlinear runs
    critical_exponent: float | None = None  # s_c = 1/2 - 2/p

    def __post_init__(self):
        if self.dt == 0 or not np.isfinite(self.dt):
            raise InvalidInput("dt must be finite and nonzero")
        if not self.t_final >= abs(self.dt) * (1 - 1e-12):
            raise InvalidInput("t_final must be at least |dt|")
        if self.p < 0:
            raise InvalidInput("p must be nonnegative")
        if self.lam != 0 and not self.nonlinear:
            raise InvalidInput("lam != 0 requires nonlinear=True (exploratory mode)")
        if self.snapshot_stride < 1:
            raise InvalidInput("snapshot_stride must be >= 1")
        if self.nonlinear and self.p > 0 and self.critical_exponent is None:
            object.__setattr__(self, "critical_exponent", 0.5 - 2.0 / self.p)

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_final / abs(self.dt))))

    @property
    def step(self) -> float:
        """Signed step actually used: t_final / steps, with the sign of dt."""
        return np.sign(self.dt) * self.t_final / self.steps

    def eta_values(self, grid: Grid) -> np.ndarray:
        if self.potential is None:
            return np.zeros(grid.size)
        if self.potential.grid != grid:
            raise InvalidInput("potential and data live on different grids")
        return self.potential.values

    @property
    def conserves_mass(self) -> bool:
        return self.lam == 0 and (self.potential is None or self.potential.is_real)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: tuple[float, ...]
    fields: tuple[Field, ...]
    diagnostics: tuple[dict, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.fields):
            raise InvalidInput("times and fields differ in length")
        t = np.asarray(self.times)
        if len(t) and t[0] != 0:
            raise InvalidInput("trajectory must start at t = 0")
        d = np.diff(t)
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise InvalidInput("timestamps must be strictly monotone")

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.fields))

    @property
    def final(self) -> Field:
        return self.fields[-1]

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    def pairs(self) -> list[tuple[float, Field]]:
        return list(zip(self.times, self.fields))

    def masses(self) -> np.ndarray:
        return np.array([d["mass"] for d in self.diagnostics])


def diagnostics_for(t: float, u: Field, orders: Sequence[float]) -> dict:
    row = {"t": t, "mass": sobolev_norm(u, 0).value}
    for s in orders:
        row[f"H^{s:g}"] = sobolev_norm(u, s).value
    return row


class _Stepper:
    """Precomputed half-step symbol and potential samples for repeated steps."""

    def __init__(self, grid: Grid, cfg: EvolutionConfig, dt: float):
        self.grid = grid
        self.dt = dt
        self.half = np.exp(-0.5j * dt * grid.xi**2)
        self.eta = cfg.eta_values(grid)
        self.lin_phase = np.exp(1j * dt * self.eta)
        self.lam = cfg.lam
        self.p = cfg.p

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.fft.ifft(self.half * np.fft.fft(v))
        if self.lam:
            with np.errstate(over="raise", invalid="raise"):
                try:
                    nl = np.abs(v) ** self.p
                except FloatingPointError as exc:
                    raise SolverAbort(f"|u|^p overflowed (p={self.p})") from exc
            if not np.all(np.isfinite(nl)):
                raise SolverAbort(f"|u|^p overflowed (p={self.p})")
            v = v * self.lin_phase * np.exp(-1j * self.dt * self.lam * nl)
        else:
            v = v * self.lin_phase
        return np.fft.ifft(self.half * np.fft.fft(v))


def strang_step(u: Field, cfg: EvolutionConfig, dt: float | None = None) -> Field:
    """One Strang step of size ``dt`` (defaults to ``cfg.step``)."""
    dt = cfg.step if dt is None else dt
    stepper = _Stepper(u.grid, cfg, dt)
    return Field(u.grid, stepper(u.physical().values))


def _guard(u: Field, cfg: EvolutionConfig, t: float) -> None:
    if cfg.decay_tol is None:
        return
    try:
        check_decay(u, cfg.decay_tol)
    except BoundaryContamination as exc:
        raise BoundaryContamination(f"at t={t:.6g}: {exc}") from None


def evolve(u0: Field, cfg: EvolutionConfig) -> Trajectory:
    """Strang-split evolution from ``u0`` up to ``cfg.t_final``.

    Snapshots (and diagnostics) are kept every ``snapshot_stride`` steps plus
    the final time. A negative ``dt`` runs the flow backwards.
    """
    u0 = u0.physical()
    _guard(u0, cfg, 0.0)
    dt = cfg.step
    stepper = _Stepper(u0.grid, cfg, dt)
    v = u0.values.copy()
    times, fields = [0.0], [u0]
    diags = [diagnostics_for(0.0, u0, cfg.norm_orders)]
    m0 = diags[0]["mass"]
    n = cfg.steps
    for k in range(1, n + 1):
        v = stepper(v)
        if k % cfg.snapshot_stride == 0 or k == n:
            t = k * dt
            u = Field(u0.grid, v)
            _guard(u, cfg, t)
            times.append(t)
            fields.append(u)
            diags.append(diagnostics_for(t, u, cfg.norm_orders))
    meta = {"dt": dt, "steps": n, "integrator": "strang"}
    if cfg.conserves_mass and m0 > 0:
        meta["mass_drift"] = float(max(abs(d["mass"] - m0) for d in diags) / m0)
    return Trajectory(tuple(times), tuple(fields), tuple(diags), meta)


def _cumtrapz(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0)
    return out


def picard_solve(
    u0: Field,
    cfg: EvolutionConfig,
    iterations: int = 12,
    tol: float = 1e-10,
) -> Trajectory:
    """Fixed-point iteration of the Duhamel formula on the node grid t_n = n dt.

    Works in the interaction picture ``v = e^{-it d_x^2} u``:
    ``v(t) = u0 + i int_0^t e^{-i rho d_x^2}(eta e^{i rho d_x^2} v) drho``,
    with the trapezoid rule in ``rho``. Aborts if the iterate distance grows
    twice in a row.
    """
    if cfg.lam != 0:
        raise InvalidInput("picard_solve handles the linear equation only (lam = 0)")
    u0 = u0.physical()
    grid = u0.grid
    dt = cfg.step
    n = cfg.steps
    t = dt * np.arange(n + 1)
    xi2 = grid.xi**2
    fwd = np.exp(-1j * np.outer(t, xi2))  # e^{i t d_x^2} in frequency
    u0h = np.fft.fft(u0.values)
    vh = np.broadcast_to(u0h, (n + 1, grid.size)).copy()
    eta = cfg.eta_values(grid)
    norm0 = np.sqrt(np.sum(np.abs(u0h) ** 2)) or 1.0
    distances: list[float] = []
    for it in range(iterations):
        u_phys = np.fft.ifft(fwd * vh, axis=1)
        g = np.conj(fwd) * np.fft.fft(eta * u_phys, axis=1)
        new = u0h + 1j * _cumtrapz(g, dt)
        dist = float(np.max(np.sqrt(np.sum(np.abs(new - vh) ** 2, axis=1))) / norm0)
        vh = new
        distances.append(dist)
        log.debug("picard iteration %d: distance %.3e", it + 1, dist)
        if dist < tol:
            break
        if len(distances) >= 3 and distances[-1] > distances[-2] > distances[-3]:
            raise NonContraction(
                f"Picard iterates diverge (distances {distances[-3:]}); reduce t_final"
            )
    u = np.fft.ifft(fwd * vh, axis=1)
    keep = [k for k in range(n + 1) if k % cfg.snapshot_stride == 0 or k == n]
    fields = tuple(Field(grid, u[k]) for k in keep)
    times = tuple(float(t[k]) for k in keep)
    diags = tuple(diagnostics_for(tk, f, cfg.norm_orders) for tk, f in zip(times, fields))
    return Trajectory(times, fields, diags, {"dt": dt, "iterations": len(distances), "distances": distances, "integrator": "picard"})


def interaction_picture(traj: Trajectory) -> Trajectory:
    """Map each snapshot u(t) to v(t) = e^{-it d_x^2} u(t)."""
    fields = tuple(free_propagate(u, -t) for t, u in traj)
    return Trajectory(traj.times, fields, traj.diagnostics, {**traj.meta, "picture": "interaction"})
