"""Normal-form and commutator decompositions as executable lattice operators.

Bilinear forms act on frequency-lattice samples through the circular
convolution that a pointwise product on the grid induces:

    (f g)^(xi_k) = (dxi / 2pi) sum_j f^(xi_{k-j}) g^(xi_j),

so every identity below is exact on the lattice up to roundoff, apart from
the time quadrature that enters ``decomposition_residual``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate

from .errors import InvalidInput
from .evolution import Trajectory
from .littlewood_paley import PHI, SHIFT, dyadic_bands, is_dyadic, phi_le, project
from .potentials import Potential
from .spectral import Field, Grid, abs_power, apply_multiplier, japanese, l2_norm

MAX_BILINEAR_SIZE = 2**13
# Range of phase_ratio / min{|x|^{b-2}, |y|^{b-2}} found by scripts/scan_phase_ratio.py
# for beta in [0.5, 1): the infimum beta/2 is approached near |x| = |y|, the
# supremum 1 as |y|/|x| -> 0 or infinity.
PHASE_RATIO_BOUNDS = (0.25, 1.0)


@dataclass(frozen=True)
class NormalFormConfig:
    s: float = 2.0
    n0: int = 16
    eps0: float = 0.1
    beta: float | None = None

    def __post_init__(self):
        if not is_dyadic(self.n0) or self.n0 < 2:
            raise InvalidInput(f"N0 must be a dyadic number >= 2, got {self.n0}")
        if not self.eps0 > 0:
            raise InvalidInput("eps0 must be positive")
        if self.beta is None:
            object.__setattr__(self, "beta", 1.0 - self.eps0 / 2.0)
        if not 0 < self.beta < 1:
            raise InvalidInput(f"beta must lie in (0, 1), got {self.beta}")


def phase_ratio(x, y, beta: float) -> np.ndarray:
    """(|x|^beta - |y|^beta) / (x^2 - y^2), off the resonant set |x| = |y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if beta >= 2 and beta != 2:
        raise InvalidInput("beta must be < 2 (or exactly 2)")
    den = x**2 - y**2
    if np.any(den == 0):
        raise InvalidInput("phase_ratio is undefined on the resonant set |x| = |y|")
    return (np.abs(x) ** beta - np.abs(y) ** beta) / den


def min_law(x, y, beta: float) -> np.ndarray:
    return np.minimum(np.abs(x) ** (beta - 2.0), np.abs(y) ** (beta - 2.0))


def _m_from_output(xi, xi1, xi2, s: float, n0: float) -> np.ndarray:
    """Multiplier with the output frequency xi passed explicitly."""
    xi = np.asarray(xi, dtype=float)
    axi = np.abs(xi)
    safe_axi = np.where(axi > 0, axi, 1.0)
    high = 1.0 - phi_le(axi, n0)
    low = np.where(axi > 0, PHI(SHIFT * np.abs(xi2) / safe_axi), 0.0)
    cut = high * low
    den = xi**2 - np.asarray(xi2, dtype=float) ** 2
    live = cut != 0
    if np.any(live & (den == 0)):
        raise AssertionError("resonant frequency inside the multiplier support")
    safe = np.where(live, den, 1.0)
    return np.where(live, japanese(xi, s) * japanese(xi1, 2.0 - s) / safe * cut, 0.0)


def multiplier_m(xi1, xi2, s: float, n0: float) -> np.ndarray:
    """m(xi1, xi2) = <xi>^s <xi1>^{2-s} / (|xi|^2 - |xi2|^2) phi_{>=N0}(|xi|) phi_{<<1}(|xi2|/|xi|)."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return _m_from_output(xi1 + xi2, xi1, xi2, s, n0)


def _check_size(grid: Grid) -> None:
    if grid.size > MAX_BILINEAR_SIZE:
        raise InvalidInput(f"K={grid.size} exceeds the O(K^2) cost guard {MAX_BILINEAR_SIZE}; downsample")


def _row_chunks(k: int, budget: int = 2**22):
    step = max(1, budget // k)
    for start in range(0, k, step):
        yield slice(start, min(k, start + step))


class BilinearForm:
    """B(f, .) for a fixed first argument, as a dense lattice matrix.

    ``apply(g)`` returns the frequency samples of B(f, g). The matrix entry
    (k, j) is ``(dxi/2pi) m(xi_{k-j}, xi_j) f^(xi_{k-j})`` with ``xi = xi_k``.
    """

    def __init__(self, f: Field, s: float, n0: float, symbol=None):
        _check_size(f.grid)
        self.grid = f.grid
        g = f.grid
        k = g.size
        fh = f.frequency().values
        xi = g.xi
        self.matrix = np.empty((k, k), dtype=np.complex128)
        cols = np.arange(k)
        for rows in _row_chunks(k):
            r = np.arange(rows.start, rows.stop)
            idx = (r[:, None] - cols[None, :]) % k
            xi_out = xi[r][:, None]
            xi1 = xi[idx]
            xi2 = xi[cols][None, :]
            if symbol is None:
                m = _m_from_output(np.broadcast_to(xi_out, xi1.shape), xi1, np.broadcast_to(xi2, xi1.shape), s, n0)
            else:
                m = symbol(np.broadcast_to(xi_out, xi1.shape), xi1, np.broadcast_to(xi2, xi1.shape))
            self.matrix[rows] = (g.dxi / (2 * np.pi)) * m * fh[idx]

    def apply_hat(self, gh: np.ndarray) -> np.ndarray:
        return self.matrix @ gh

    def apply(self, g: Field) -> Field:
        if g.grid != self.grid:
            raise InvalidInput("grid mismatch")
        return Field(self.grid, self.apply_hat(g.frequency().values), "frequency")


def bilinear_B(f: Field, g: Field, s: float, n0: float) -> Field:
    """B(f, g) by the direct O(K^2) lattice double sum; returned in physical space."""
    if f.grid != g.grid:
        raise InvalidInput("grid mismatch")
    return BilinearForm(f, s, n0).apply(g).physical()


def _low_ratio_symbol(xi_out, xi1, xi2):
    """phi_{<<1}(|xi2|/|xi|): the non-resonant part of the product."""
    axi = np.abs(xi_out)
    safe = np.where(axi > 0, axi, 1.0)
    return np.where(axi > 0, PHI(SHIFT * np.abs(xi2) / safe), 0.0)


def resonance_R(
    eta: Potential | Field,
    u: Field,
    n0: int,
    method: Literal["exact", "dyadic"] = "exact",
) -> Field:
    """R(eta, u) = P_{<=N0}(eta u) + P_{>=N0}[resonant/high-high part of eta u].

    ``exact`` uses the complement of the normal-form cutoff, i.e. the symbol
    ``1 - phi_{<<1}(|xi2|/|xi|)``, which is what makes the decomposition
    identity hold exactly. ``dyadic`` evaluates the Littlewood-Paley double
    sum ``sum_{M >~ N} P_N(eta P_M u)`` truncated at the top band.
    """
    ef = eta.field if isinstance(eta, Potential) else eta
    if ef.grid != u.grid:
        raise InvalidInput("grid mismatch")
    prod = u.pointwise(ef)
    low = project(prod, "<=", n0)
    if method == "exact":
        nonres = BilinearForm(ef, 0.0, n0, symbol=_low_ratio_symbol).apply(u.frequency())
        res = prod.frequency() - nonres
    elif method == "dyadic":
        bands = dyadic_bands(u.grid)
        res = Field.zeros(u.grid, "frequency")
        pieces = {m: project(u, "=", m) for m in bands}
        for nb in bands:
            inner = Field.zeros(u.grid)
            for mb in bands:
                if mb >= nb / SHIFT:
                    inner = inner + pieces[mb].pointwise(ef)
            res = res + project(inner, "=", nb).frequency()
    else:
        raise InvalidInput(f"unknown method {method!r}")
    return (low + project(res, ">=", n0)).physical()


@dataclass
class ResidualReport:
    lhs_norm: float
    rhs_norm: float
    residual: float
    config: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _uniform_step(times) -> float:
    t = np.asarray(times, dtype=float)
    if len(t) < 2:
        raise InvalidInput("need at least two snapshots")
    d = np.diff(t)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise InvalidInput("snapshots must sit on a uniform quadrature grid (snapshot_stride=1)")
    return float(d[0])


def decomposition_residual(
    traj: Trajectory,
    eta: Potential,
    cfg: NormalFormConfig,
    t_index: int = -1,
) -> ResidualReport:
    """Relative L2 mismatch of the normal-form rewriting of <nabla>^s u(t).

    Assembles
      <nabla>^s e^{it d^2} u0 - e^{it d^2} B(<nabla>^{s-2} eta, u0) + B(<nabla>^{s-2} eta, u(t))
      + i int_0^t e^{i(t-rho) d^2} <nabla>^s R(eta, u) - i int_0^t e^{i(t-rho) d^2} B(<nabla>^{s-2} eta, eta u)
    with trapezoid time integrals over the trajectory snapshots and compares
    it with <nabla>^s u(t).
    """
    grid = traj.grid
    if eta.grid != grid:
        raise InvalidInput("grid mismatch")
    times = np.asarray(traj.times, dtype=float)
    n = len(times) - 1 if t_index == -1 else t_index
    s, n0 = cfg.s, cfg.n0
    t = float(times[n])
    xi = grid.xi
    bracket = japanese(xi, s)
    prop = lambda tau: np.exp(-1j * tau * xi**2)  # noqa: E731
    uh = [traj.fields[k].frequency().values for k in range(n + 1)]
    lhs = bracket * uh[n]

    eta_s = apply_multiplier(eta.field, lambda z: japanese(z, s - 2.0))
    bform = BilinearForm(eta_s, s, n0)
    free = bracket * prop(t) * uh[0]
    b0 = -prop(t) * bform.apply_hat(uh[0])
    bt = bform.apply_hat(uh[n])
    terms = {"free": free, "boundary_0": b0, "boundary_t": bt}
    if n > 0:
        h = _uniform_step(times[: n + 1])
        w = np.full(n + 1, h)
        w[0] = w[-1] = h / 2
        res_int = np.zeros(grid.size, dtype=complex)
        bil_int = np.zeros(grid.size, dtype=complex)
        ev = eta.values
        for k in range(n + 1):
            u = traj.fields[k]
            r = resonance_R(eta, u, n0).frequency().values
            eu = u.pointwise(ev).frequency().values
            pk = prop(t - times[k])
            res_int += w[k] * pk * bracket * r
            bil_int += w[k] * pk * bform.apply_hat(eu)
        terms["resonance"] = 1j * res_int
        terms["nonresonant"] = -1j * bil_int
    rhs = sum(terms.values())

    def norm(v):
        return float(np.sqrt(grid.dxi / (2 * np.pi) * np.sum(np.abs(v) ** 2)))

    lhs_n = norm(lhs)
    return ResidualReport(
        lhs_norm=lhs_n,
        rhs_norm=norm(rhs),
        residual=norm(lhs - rhs) / lhs_n if lhs_n else norm(lhs - rhs),
        config={"s": s, "N0": n0, "t": t, "dt": float(times[1] - times[0]) if len(times) > 1 else 0.0, "K": grid.size, "L": grid.half_width},
        terms={k: norm(v) for k, v in terms.items()},
    )


def commutator_split_residual(
    w: Field,
    eta: Potential | Field,
    s: float,
    beta: float,
    n0: int | None = None,
) -> ResidualReport:
    """Check D^s(eta w) = D^{s-beta}(eta D^beta w) + D^{s-beta}([D^beta, eta] w).

    With ``n0`` both sides are additionally projected by P_{>=N0}.
    """
    ef = eta.field if isinstance(eta, Potential) else eta
    if ef.grid != w.grid:
        raise InvalidInput("grid mismatch")

    def d(f, a):
        return apply_multiplier(f, lambda z: abs_power(z, a))

    ew = w.pointwise(ef)
    lhs = d(ew, s)
    dbw = d(w, beta)
    main = dbw.pointwise(ef)
    comm = d(ew, beta) - main
    main_s = d(main, s - beta)
    comm_s = d(comm, s - beta)
    # Roundoff scales with the unprojected pieces, which can dwarf their
    # (projected) sum; the residual is measured against that scale.
    scale = max(l2_norm(lhs), l2_norm(main_s), l2_norm(comm_s))
    if n0 is not None:
        lhs = project(lhs, ">=", n0)
        main_s = project(main_s, ">=", n0)
        comm_s = project(comm_s, ">=", n0)
    rhs = main_s + comm_s
    ln = l2_norm(lhs)
    terms = {"main": l2_norm(main_s), "commutator": l2_norm(comm_s)}
    diff = l2_norm(lhs - rhs)
    return ResidualReport(
        lhs_norm=ln,
        rhs_norm=l2_norm(rhs),
        residual=diff / scale if scale else diff,
        config={"s": s, "beta": beta, "N0": n0},
        terms=terms,
    )


def min_power_integral_exact(xi: float, gamma: float) -> float:
    """2|xi|^{gamma+1} (1 + 1/(-gamma-1)): the closed form of int min{|xi|^g, |z|^g} dz."""
    if gamma >= -1:
        raise InvalidInput("the integral diverges for gamma >= -1")
    a = abs(xi)
    return 2.0 * a ** (gamma + 1.0) * (1.0 + 1.0 / (-gamma - 1.0))


def min_power_integral_quad(xi: float, gamma: float) -> float:
    """Adaptive quadrature of int_R min{|xi|^gamma, |z|^gamma} dz."""
    if gamma >= -1:
        raise InvalidInput("the integral diverges for gamma >= -1")
    a = abs(xi)

    def f(z):
        return min(a**gamma, abs(z) ** gamma) if z != 0 else a**gamma

    core, _ = integrate.quad(f, 0.0, a, epsabs=1e-13, epsrel=1e-12)
    tail, _ = integrate.quad(f, a, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 2.0 * (core + tail)


def dyadic_pairs(count_per_axis: int = 100, span: tuple[float, float] = (-10.0, 10.0)):
    """(x, y) pairs with |x|, |y| on a log2-uniform ladder and both signs of y."""
    e = np.linspace(span[0], span[1], count_per_axis // 2 if count_per_axis > 1 else 1)
    ax = 2.0**e
    x, y = np.meshgrid(ax, np.concatenate([ax, -ax]), indexing="ij")
    x, y = x.ravel(), y.ravel()
    keep = np.abs(x) != np.abs(y)
    return x[keep], y[keep]


@dataclass
class FactorReport:
    beta_ranges: dict
    integrals: list
    law_pass: bool
    integral_pass: bool

    @property
    def passed(self) -> bool:
        return self.law_pass and self.integral_pass


def nonresonant_factor_check(
    betas=(0.5, 0.9, 0.99),
    gammas=(-1.5, -2.0, -3.0),
    xis=(1.0, 4.0, 16.0),
    points_per_axis: int = 142,
    bounds: tuple[float, float] = PHASE_RATIO_BOUNDS,
    integral_tol: float = 1e-6,
) -> FactorReport:
    """(a) phase_ratio against the min-law over a dyadic sweep; (b) the min-power integral."""
    x, y = dyadic_pairs(points_per_axis)
    ranges = {}
    ok = True
    for b in betas:
        q = phase_ratio(x, y, b) / min_law(x, y, b)
        lo, hi = float(q.min()), float(q.max())
        ranges[str(b)] = {"min": lo, "max": hi, "points": int(q.size)}
        ok &= bounds[0] * (1 - 1e-12) <= lo and hi <= bounds[1] * (1 + 1e-12)
    rows = []
    iok = True
    for g in gammas:
        for xi in xis:
            exact = min_power_integral_exact(xi, g)
            quad = min_power_integral_quad(xi, g)
            err = abs(quad - exact) / abs(exact)
            rows.append({"gamma": g, "xi": xi, "quadrature": quad, "closed_form": exact, "rel_error": err})
            iok &= err <= integral_tol
    return FactorReport(ranges, rows, bool(ok), bool(iok))
