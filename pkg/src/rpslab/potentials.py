"""Potential catalog, L^r norms and the L^r + L^inf level-set split."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidInput
from .littlewood_paley import make_cutoff
from .spectral import Field, Grid, NormReport, lp_norm

SHIFT_FACTOR = np.sqrt(np.pi / 3.0)


@dataclass(frozen=True, eq=False)
class Potential:
    kind: str
    params: dict[str, Any]
    field: Field

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.physical().values

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def descriptor(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": dict(self.params)}

    def save(self, stem) -> tuple[Path, Path]:
        """Write ``<stem>.rpsf`` plus a ``<stem>.json`` descriptor sidecar."""
        from .io import write_field

        stem = Path(stem)
        bin_path = write_field(stem.with_suffix(".rpsf"), self.field)
        meta = stem.with_suffix(".json")
        meta.write_text(json.dumps(self.descriptor(), sort_keys=True, indent=2) + "\n")
        return bin_path, meta

    @classmethod
    def load(cls, stem) -> "Potential":
        from .io import read_field

        stem = Path(stem)
        desc = json.loads(stem.with_suffix(".json").read_text())
        return cls(desc["kind"], desc["params"], read_field(stem.with_suffix(".rpsf")))


def zero_potential(grid: Grid) -> Potential:
    return Potential("zero", {}, Field.zeros(grid))


def constant_potential(grid: Grid, c: complex) -> Potential:
    return Potential("constant", {"value": c}, Field(grid, np.full(grid.size, c, dtype=complex)))


def custom_potential(grid: Grid, samples) -> Potential:
    return Potential("custom", {}, Field(grid, samples))


def mollified_delta(grid: Grid, eps: float, mass: float = 1.0) -> Potential:
    """mass * eps^{-1} e^{-(x/eps)^2} / sqrt(pi), so that the integral equals ``mass``."""
    if eps < 4 * grid.dx:
        raise InvalidInput(f"eps={eps} is below 4*dx={4 * grid.dx:.4g}; refine the grid")
    if not mass > 0:
        raise InvalidInput("mass must be positive")
    x = grid.x
    vals = mass * np.exp(-((x / eps) ** 2)) / (eps * np.sqrt(np.pi))
    return Potential("mollified_delta", {"eps": eps, "mass": mass}, Field(grid, vals))


def mollified_delta_hat(xi, eps: float, mass: float = 1.0) -> np.ndarray:
    """Exact transform of :func:`mollified_delta`."""
    return mass * np.exp(-((eps * np.asarray(xi)) ** 2) / 4.0)


def sign_jump(grid: Grid) -> Potential:
    """sgn x, with the sample at x = 0 (and the wrap point -L) set to +-1 by odd symmetry."""
    x = grid.x
    vals = np.where(x >= 0, 1.0, -1.0)
    return Potential("sign_jump", {}, Field(grid, vals))


def annulus_bump_hat(xi, m: float, r: float) -> np.ndarray:
    chi = make_cutoff("annulus", 0.5, 2.0)
    return m ** (-1.0 + 1.0 / r) * chi(np.asarray(xi) / m)


def annulus_bump_potential(grid: Grid, m: float, r: float) -> Potential:
    """eta^ = M^{-1+1/r} chi_{1/2<=|.|<=2}(xi/M), built on the frequency lattice."""
    if not 1 < r <= 2:
        raise InvalidInput(f"annulus bump needs 1 < r <= 2, got {r}")
    if (2.0 + 0.25) * m >= grid.nyquist:
        raise InvalidInput(f"annulus support 2.25*M={2.25 * m} reaches Nyquist {grid.nyquist:.4g}")
    f = Field(grid, annulus_bump_hat(grid.xi, m, r), "frequency").physical()
    # Real and even by construction; drop roundoff imaginary parts.
    f = Field(grid, f.values.real)
    return Potential("annulus_bump", {"M": m, "r": r}, f)


def shifted_annulus_hat(xi, m: float, n: float, r: float) -> np.ndarray:
    a = SHIFT_FACTOR * m
    chi = make_cutoff("annulus", a, a + n)
    return n ** (-1.0 + 1.0 / r) * chi(np.asarray(xi))


def shifted_annulus_potential(grid: Grid, m: float, n: float, r: float) -> Potential:
    """eta^ = N^{-1+1/r} chi_{sqrt(pi/3)M <= |.| <= sqrt(pi/3)M + N}."""
    if not r > 2:
        raise InvalidInput(f"shifted annulus needs r > 2, got {r}")
    if SHIFT_FACTOR * m + n + 1 > grid.nyquist:
        raise InvalidInput("shifted annulus band exceeds Nyquist")
    f = Field(grid, shifted_annulus_hat(grid.xi, m, n, r), "frequency").physical()
    f = Field(grid, f.values.real)
    return Potential("shifted_annulus", {"M": m, "N": n, "r": r}, f)


def power_law_potential(grid: Grid, gamma: float, delta0: float = 0.0) -> Potential:
    """|x|^{-gamma}, frozen at its value |x| = delta0 on the core.

    ``delta0 = 0`` falls back to one grid cell, since the sample at x = 0
    would otherwise be infinite.
    """
    if not gamma > 0:
        raise InvalidInput("gamma must be positive")
    if gamma >= 1 and delta0 <= 0:
        raise InvalidInput("gamma >= 1 is not locally integrable without a core radius")
    core = delta0 if delta0 > 0 else grid.dx
    ax = np.maximum(np.abs(grid.x), core)
    return Potential("power_law", {"gamma": gamma, "delta0": core}, Field(grid, ax ** (-gamma)))


def lr_norm(eta: Potential, r: float) -> NormReport:
    if not r >= 1:
        raise InvalidInput(f"need r >= 1, got {r}")
    return lp_norm(eta.field, r)


@dataclass(frozen=True, eq=False)
class LrSplit:
    rough: Potential
    bounded: Potential
    threshold: float
    rough_norm: float
    bounded_norm: float
    r: float = 1.0
    extra: dict = field(default_factory=dict)


def decompose_lr_linf(eta: Potential, threshold: float, r: float = 1.0) -> LrSplit:
    """eta_1 = eta 1_{|eta| > threshold} (in L^r), eta_2 = the rest (in L^inf)."""
    if not threshold > 0:
        raise InvalidInput("threshold must be positive")
    v = eta.values
    big = np.abs(v) > threshold
    rough = Potential(f"{eta.kind}:rough", dict(eta.params), Field(eta.grid, np.where(big, v, 0)))
    bounded = Potential(f"{eta.kind}:bounded", dict(eta.params), Field(eta.grid, np.where(big, 0, v)))
    return LrSplit(
        rough,
        bounded,
        threshold,
        lr_norm(rough, r).value,
        lr_norm(bounded, np.inf).value,
        r,
    )
