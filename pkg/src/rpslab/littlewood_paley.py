"""Smooth cutoffs and inhomogeneous Littlewood-Paley projections.

The bump ``phi`` equals 1 on ``r <= 1`` and 0 on ``r >= 2``; ``phi_N(r) =
phi(r/N) - phi(2r/N)`` for ``N >= 2`` and ``phi_1 = phi``, so the bands
telescope to ``phi(r/N_top)``. The ``<<``/``>~`` family uses the ``2^5``
shift of the usual notation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import InvalidInput
from .spectral import Field, Grid, abs_power, apply_multiplier, lp_norm, l2_norm

SHIFT = 2.0**5
SMOOTHSTEP_ORDER = 2  # C^2 quintic ramp 6t^5 - 15t^4 + 10t^3

Selector = Literal["=", "<=", ">=", "<<", "<~", ">~", ">>"]
SELECTORS = ("=", "<=", ">=", "<<", "<~", ">~", ">>")


def smoothstep(t, order: int = SMOOTHSTEP_ORDER) -> np.ndarray:
    """Generalized smoothstep: 0 for t<=0, 1 for t>=1, C^order in between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    n = order
    out = np.zeros_like(t)
    for k in range(n + 1):
        c = (-1) ** k * _binom(n + k, k) * _binom(2 * n + 1, n - k)
        out += c * t ** (n + k + 1)
    return np.clip(out, 0.0, 1.0)


def _binom(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


@dataclass(frozen=True)
class CutoffProfile:
    """Either the bump ``phi`` (core ``r<=a``, support ``r<b``) or the annulus
    ``chi_{a<=|.|<=b}`` (core ``[a, b]``, support ``(a-1/4, b+1/4)``)."""

    kind: Literal["bump", "annulus"]
    a: float
    b: float
    order: int = SMOOTHSTEP_ORDER

    def __call__(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "bump":
            return 1.0 - smoothstep((r - self.a) / (self.b - self.a), self.order)
        rise = smoothstep((r - (self.a - 0.25)) / 0.25, self.order)
        fall = 1.0 - smoothstep((r - self.b) / 0.25, self.order)
        return rise * fall

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "bump":
            return (0.0, self.b)
        return (self.a - 0.25, self.b + 0.25)


def make_cutoff(kind: str = "bump", a: float = 1.0, b: float = 2.0, order: int = SMOOTHSTEP_ORDER) -> CutoffProfile:
    if kind not in ("bump", "annulus"):
        raise InvalidInput(f"unknown cutoff kind {kind!r}")
    if not a < b:
        raise InvalidInput(f"need a < b, got a={a}, b={b}")
    if kind == "annulus" and not a > 0.25:
        raise InvalidInput("annulus cutoff needs a > 1/4")
    if kind == "bump" and not a > 0:
        raise InvalidInput("bump cutoff needs a > 0")
    return CutoffProfile(kind, float(a), float(b), order)


PHI = make_cutoff("bump", 1.0, 2.0)


def phi_le(r, n: float) -> np.ndarray:
    return PHI(np.asarray(r, dtype=float) / n)


def band_symbol(r, n: int) -> np.ndarray:
    """phi_N(|xi|)."""
    if n == 1:
        return PHI(r)
    return phi_le(r, n) - phi_le(r, n / 2)


def selector_symbol(r, selector: Selector, n: float) -> np.ndarray:
    r = np.abs(np.asarray(r, dtype=float))
    if selector == "=":
        return band_symbol(r, int(n))
    if selector == "<=":
        return phi_le(r, n)
    if selector == ">=":
        return 1.0 - phi_le(r, n)
    if selector == "<<":
        return phi_le(SHIFT * r, n)
    if selector == "<~":
        return phi_le(r / SHIFT, n)
    if selector == ">~":
        return 1.0 - phi_le(SHIFT * r, n)
    if selector == ">>":
        return 1.0 - phi_le(r / SHIFT, n)
    raise InvalidInput(f"unknown selector {selector!r}")


def is_dyadic(n) -> bool:
    return float(n).is_integer() and int(n) >= 1 and (int(n) & (int(n) - 1)) == 0


def top_band(grid: Grid) -> int:
    """Smallest dyadic N with phi(|xi|/N) = 1 on the whole lattice."""
    n = 1
    while n < grid.nyquist:
        n *= 2
    return n


def dyadic_bands(grid: Grid) -> list[int]:
    out, n, top = [], 1, top_band(grid)
    while n <= top:
        out.append(n)
        n *= 2
    return out


def project(f: Field, selector: Selector, n: int) -> Field:
    """Apply P_N, P_{<=N}, P_{>=N}, P_{<<N}, P_{<~N}, P_{>~N} or P_{>>N}."""
    if not is_dyadic(n):
        raise InvalidInput(f"N must be a power of two >= 1, got {n}")
    if n > top_band(f.grid):
        raise InvalidInput(f"N={n} exceeds the resolvable band {top_band(f.grid)}")
    return apply_multiplier(f, lambda xi: selector_symbol(xi, selector, n))


@dataclass(frozen=True)
class Band:
    n: int
    field: Field
    energy: float


@dataclass(frozen=True)
class DyadicSpectrum:
    bands: tuple[Band, ...]
    grid: Grid
    total: float

    @property
    def ns(self) -> np.ndarray:
        return np.array([b.n for b in self.bands])

    @property
    def energies(self) -> np.ndarray:
        return np.array([b.energy for b in self.bands])

    def reconstruct(self) -> Field:
        out = Field.zeros(self.grid, "frequency")
        for b in self.bands:
            out = out + b.field
        return out

    def fractions(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(len(self.bands))
        return self.energies**2 / self.total**2

    def to_csv(self, path) -> Path:
        from .io import write_csv

        rows = zip(self.ns, self.energies, self.fractions())
        return write_csv(path, ["N", "energy", "energy_fraction"], rows)

    @classmethod
    def read_csv(cls, path) -> list[tuple[int, float, float]]:
        with open(path, newline="") as fh:
            return [(int(r["N"]), float(r["energy"]), float(r["energy_fraction"])) for r in csv.DictReader(fh)]


def band_energies(f: Field) -> DyadicSpectrum:
    fh = f.frequency()
    r = np.abs(f.grid.xi)
    bands = []
    for n in dyadic_bands(f.grid):
        bf = Field(f.grid, fh.values * band_symbol(r, n), "frequency")
        bands.append(Band(n, bf, l2_norm(bf)))
    return DyadicSpectrum(tuple(bands), f.grid, l2_norm(f))


# Twice the largest ratio seen on the frozen corpus (see scripts/calibrate_bernstein.py).
BERNSTEIN_CONSTANT = 1.8489718049294497
BERNSTEIN_PAIRS = ((1.0, 2.0), (1.0, 4.0), (1.0, np.inf), (2.0, 4.0), (2.0, np.inf), (4.0, np.inf))


@dataclass(frozen=True)
class BernsteinReport:
    n: int
    p: float
    q: float
    ratio: float | None
    derivative_ratio: float | None = None
    s: float = 0.0

    @property
    def defined(self) -> bool:
        return self.ratio is not None


def check_bernstein(f: Field, n: int, p: float, q: float, s: float = 0.0) -> BernsteinReport:
    """Ratio ``||P_N f||_q / (N^{1/p-1/q} ||P_N f||_p)``.

    With ``s != 0`` the report also carries ``||D^s P_N f||_p / (N^s ||P_N f||_p)``.
    """
    if not (1 <= p <= q):
        raise InvalidInput(f"need 1 <= p <= q, got p={p}, q={q}")
    pn = project(f, "=", n).physical()
    denom_p = lp_norm(pn, p).value
    if denom_p == 0:
        return BernsteinReport(n, p, q, None, None, s)
    inv_q = 0.0 if q == np.inf else 1.0 / q
    ratio = lp_norm(pn, q).value / (n ** (1.0 / p - inv_q) * denom_p)
    dratio = None
    if s != 0:
        d = apply_multiplier(pn, lambda xi: abs_power(xi, s))
        dratio = lp_norm(d, p).value / (n**s * denom_p)
    return BernsteinReport(n, p, q, float(ratio), dratio, s)


def bernstein_corpus(grid: Grid, count: int = 50, seed: int = 20240611) -> list[Field]:
    """Frozen random corpus of modulated Gaussian packets used to calibrate C_B."""
    rng = np.random.default_rng(seed)
    x = grid.x
    out = []
    for _ in range(count):
        terms = rng.integers(1, 4)
        v = np.zeros(grid.size, dtype=complex)
        for _ in range(terms):
            amp = rng.normal() + 1j * rng.normal()
            k0 = rng.uniform(0, 0.5 * grid.nyquist)
            width = rng.uniform(0.3, 3.0)
            x0 = rng.uniform(-0.3, 0.3) * grid.half_width
            v += amp * np.exp(-((x - x0) / width) ** 2 + 1j * k0 * x)
        out.append(Field(grid, v))
    return out


def corpus_max_ratio(grid: Grid, count: int = 50, seed: int = 20240611) -> float:
    worst = 0.0
    for f in bernstein_corpus(grid, count, seed):
        for n in dyadic_bands(grid)[:-1]:
            for p, q in BERNSTEIN_PAIRS:
                rep = check_bernstein(f, n, p, q)
                if rep.defined and rep.ratio > worst:
                    worst = rep.ratio
    return worst


CALIBRATION_GRID = Grid(16.0, 256)
