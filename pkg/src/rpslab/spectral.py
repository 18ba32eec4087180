"""Periodic grids, Fourier conventions, multipliers and norms.

The real line is truncated to ``[-L, L)`` with periodic wrap. Transforms are
scaled so that they approximate the continuum pair

    f^(xi) = int e^{-i x xi} f(x) dx,     f(x) = (1/2pi) int e^{i x xi} f^(xi) dxi,

i.e. the forward sum carries ``dx`` and the inverse carries ``dxi / 2pi``. With
this choice Plancherel reads ``||f||_2^2 = (1/2pi) int |f^|^2`` and the Sobolev
norm ``||<xi>^s f^||_{L^2} / sqrt(2pi)`` reduces to the L2 norm at ``s = 0``.

Frequency-space values are stored in FFT order, matching ``Grid.xi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Sequence, Union

import numpy as np

from .errors import BoundaryContamination, InvalidInput

Space = Literal["physical", "frequency"]
Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-half_width, half_width)`` with ``size`` samples."""

    half_width: float
    size: int

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise InvalidInput(f"half_width must be positive, got {self.half_width}")
        k = int(self.size)
        if k != self.size or k < 16 or k & (k - 1):
            raise InvalidInput(f"size must be a power of two >= 16, got {self.size}")
        object.__setattr__(self, "size", k)
        object.__setattr__(self, "half_width", float(self.half_width))

    @classmethod
    def for_band(cls, xi_max: float, dxi: float) -> "Grid":
        """Smallest grid with frequency spacing ``<= dxi`` whose Nyquist exceeds ``xi_max``."""
        if dxi <= 0 or xi_max <= 0:
            raise InvalidInput("xi_max and dxi must be positive")
        half_width = np.pi / dxi
        size = 16
        while size * dxi / 2 <= xi_max:
            size *= 2
        return cls(half_width, size)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.size

    @property
    def dxi(self) -> float:
        return np.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return np.pi * self.size / (2.0 * self.half_width)

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_width + self.dx * np.arange(self.size)
        x.setflags(write=False)
        return x

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer wavenumbers k (xi = pi k / L) in FFT order."""
        k = np.fft.fftfreq(self.size, d=1.0 / self.size).astype(np.int64)
        k.setflags(write=False)
        return k

    @cached_property
    def xi(self) -> np.ndarray:
        xi = self.dxi * self.mode_index
        xi.setflags(write=False)
        return xi

    @cached_property
    def _shift_sign(self) -> np.ndarray:
        # e^{i L xi_k} = (-1)^k accounts for the grid starting at -L.
        s = np.where(self.mode_index % 2 == 0, 1.0, -1.0)
        s.setflags(write=False)
        return s

    def origin_index(self) -> int:
        return self.size // 2


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a grid, in physical or frequency space."""

    grid: Grid
    values: np.ndarray
    space: Space = "physical"

    def __post_init__(self):
        if self.space not in ("physical", "frequency"):
            raise InvalidInput(f"unknown space {self.space!r}")
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.grid.size,):
            raise InvalidInput(f"expected {self.grid.size} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("field contains non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, fn(grid.x), "physical")

    @classmethod
    def from_symbol(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, fn(grid.xi), "frequency")

    @classmethod
    def zeros(cls, grid: Grid, space: Space = "physical") -> "Field":
        return cls(grid, np.zeros(grid.size), space)

    def physical(self) -> "Field":
        return self if self.space == "physical" else inverse_transform(self)

    def frequency(self) -> "Field":
        return self if self.space == "frequency" else forward_transform(self)

    def _coerce(self, other: "Field") -> np.ndarray:
        if other.grid != self.grid:
            raise InvalidInput("fields live on different grids")
        return other.values if other.space == self.space else (
            other.frequency() if self.space == "frequency" else other.physical()
        ).values

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values + self._coerce(other), self.space)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.values - self._coerce(other), self.space)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values, self.space)

    def __mul__(self, c) -> "Field":
        if isinstance(c, Field):
            raise TypeError("use pointwise() for field products")
        return Field(self.grid, self.values * c, self.space)

    __rmul__ = __mul__

    def pointwise(self, other: Union["Field", np.ndarray]) -> "Field":
        """Physical-space product with another field or a sample array."""
        a = self.physical().values
        b = other.physical().values if isinstance(other, Field) else np.asarray(other)
        return Field(self.grid, a * b, "physical")

    def spectrum_at(self, xi: Union[float, np.ndarray]) -> np.ndarray:
        """Continuum transform ``dx * sum e^{-i x xi} f(x)`` at arbitrary frequencies."""
        f = self.physical().values
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return self.grid.dx * (np.exp(-1j * np.outer(xi, self.grid.x)) @ f)


def _check_space(f: Field, space: Space, op: str) -> None:
    if f.space != space:
        raise InvalidInput(f"{op} expects a {space}-space field, got {f.space}")


def forward_transform(f: Field) -> Field:
    _check_space(f, "physical", "forward_transform")
    g = f.grid
    return Field(g, g.dx * g._shift_sign * np.fft.fft(f.values), "frequency")


def inverse_transform(fhat: Field) -> Field:
    _check_space(fhat, "frequency", "inverse_transform")
    g = fhat.grid
    return Field(g, np.fft.ifft(g._shift_sign * fhat.values) / g.dx, "physical")


def _symbol_values(grid: Grid, m: Symbol) -> np.ndarray:
    vals = m(grid.xi) if callable(m) else m
    vals = np.broadcast_to(np.asarray(vals, dtype=np.complex128), (grid.size,))
    if not np.all(np.isfinite(vals)):
        raise InvalidInput("multiplier is not finite on the frequency lattice")
    return vals


def apply_multiplier(f: Field, m: Symbol, odd: bool = False) -> Field:
    """Return ``F^{-1}(m * F f)`` in the same space as ``f``.

    ``odd=True`` zeroes the unpaired Nyquist mode, which an odd symbol would
    otherwise treat asymmetrically.
    """
    vals = _symbol_values(f.grid, m)
    if odd:
        vals = vals.copy()
        vals[f.grid.size // 2] = 0.0
    out = Field(f.grid, f.frequency().values * vals, "frequency")
    return out if f.space == "frequency" else out.physical()


def japanese(xi: np.ndarray, s: float) -> np.ndarray:
    """<xi>^s = (1 + xi^2)^{s/2}."""
    return (1.0 + np.asarray(xi, dtype=float) ** 2) ** (0.5 * s)


def abs_power(xi: np.ndarray, s: float) -> np.ndarray:
    """|xi|^s with the zero mode set to 0 (homogeneous symbol, s != 0)."""
    a = np.abs(np.asarray(xi, dtype=float))
    if s == 0:
        return np.ones_like(a)
    out = np.zeros_like(a)
    nz = a > 0
    out[nz] = a[nz] ** s
    return out


def bessel_potential(f: Field, s: float) -> Field:
    """<nabla>^s f."""
    return apply_multiplier(f, lambda xi: japanese(xi, s))


def frac_derivative(f: Field, s: float) -> Field:
    """D^s f = (-d^2/dx^2)^{s/2} f."""
    return apply_multiplier(f, lambda xi: abs_power(xi, s))


def free_propagator_symbol(xi: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-1j * t * np.asarray(xi) ** 2)


def free_propagate(f: Field, t: float) -> Field:
    """e^{i t d_x^2} f, realized as the multiplier e^{-i t xi^2}."""
    if t == 0:
        return f
    return apply_multiplier(f, lambda xi: free_propagator_symbol(xi, t))


@dataclass(frozen=True)
class NormReport:
    kind: str
    value: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value >= 0:
            raise InvalidInput(f"norm must be nonnegative, got {self.value}")

    def __float__(self) -> float:
        return float(self.value)


def lp_norm(f: Field, p: float) -> NormReport:
    """Riemann-sum L^p norm in physical space; ``p = inf`` gives the max."""
    v = np.abs(f.physical().values)
    if p == np.inf:
        val = float(v.max(initial=0.0))
    elif p >= 1:
        val = float((f.grid.dx * np.sum(v**p)) ** (1.0 / p))
    else:
        raise InvalidInput(f"p must be >= 1, got {p}")
    return NormReport("L2" if p == 2 else "Lp", val, {"p": p})


def l2_norm(f: Field) -> float:
    return lp_norm(f, 2).value


def sobolev_norm(f: Field, s: float) -> NormReport:
    """||f||_{H^s} = (1/sqrt(2pi)) ||<xi>^s f^||_{L^2_xi}."""
    g = f.grid
    fh = f.frequency().values
    w = japanese(g.xi, 2.0 * s)
    val = np.sqrt(g.dxi / (2.0 * np.pi) * np.sum(w * np.abs(fh) ** 2))
    return NormReport("Hs", float(val), {"s": s})


def _time_norm(values: np.ndarray, times: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    if q == np.inf:
        return values.max(axis=axis)
    return np.trapezoid(values**q, times, axis=axis) ** (1.0 / q)


def mixed_norm(
    trajectory: Sequence[tuple[float, Field]],
    q: float,
    p: float,
    order: Literal["t-outer", "x-outer"] = "t-outer",
) -> NormReport:
    """L^q_t L^p_x (``t-outer``) or L^p_x L^q_t (``x-outer``) norm of a trajectory.

    Time integrals use the trapezoid rule over the snapshot times, space
    integrals the Riemann sum; infinite exponents become suprema.
    """
    if not trajectory:
        raise InvalidInput("empty trajectory")
    times = np.array([t for t, _ in trajectory], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise InvalidInput("trajectory timestamps must be strictly increasing")
    if q != np.inf and len(times) < 2:
        raise InvalidInput("finite q needs at least two snapshots")
    grid = trajectory[0][1].grid
    amp = np.abs(np.stack([u.physical().values for _, u in trajectory]))
    if order == "t-outer":
        if p == np.inf:
            per_t = amp.max(axis=1)
        else:
            per_t = (grid.dx * np.sum(amp**p, axis=1)) ** (1.0 / p)
        val = _time_norm(per_t, times, q) if len(times) > 1 or q == np.inf else per_t[0]
    elif order == "x-outer":
        per_x = _time_norm(amp, times, q, axis=0)
        val = per_x.max() if p == np.inf else (grid.dx * np.sum(per_x**p)) ** (1.0 / p)
    else:
        raise InvalidInput(f"unknown order {order!r}")
    return NormReport("mixed", float(val), {"q": q, "p": p, "order": order})


def check_decay(f: Field, tol: float = 1e-8, margin: float = 0.1) -> float:
    """Raise if ``|f|`` exceeds ``tol`` within ``margin * L`` of the box edge.

    Returns the largest edge amplitude found.
    """
    g = f.grid
    edge = np.abs(g.x) >= (1.0 - margin) * g.half_width
    peak = float(np.abs(f.physical().values[edge]).max(initial=0.0))
    if peak >= tol:
        raise BoundaryContamination(
            f"|u| = {peak:.3e} within {margin:.0%} of the boundary exceeds {tol:.1e}; enlarge L"
        )
    return peak
