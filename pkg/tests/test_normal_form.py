import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rpslab.errors import InvalidInput
from rpslab.evolution import EvolutionConfig, evolve
from rpslab.littlewood_paley import project
from rpslab.normal_form import (
    BilinearForm,
    NormalFormConfig,
    bilinear_B,
    commutator_split_residual,
    decomposition_residual,
    min_law,
    min_power_integral_exact,
    min_power_integral_quad,
    multiplier_m,
    nonresonant_factor_check,
    phase_ratio,
    resonance_R,
)
from rpslab.potentials import annulus_bump_potential, constant_potential, mollified_delta, sign_jump, zero_potential
from rpslab.spectral import Field, Grid, l2_norm


def test_phase_ratio_values():
    assert phase_ratio(2.0, 1.0, 1.0) == pytest.approx(1 / 3)
    with pytest.raises(InvalidInput):
        phase_ratio(2.0, -2.0, 0.9)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.booleans())
def test_phase_ratio_beta_two(x, y, flip):
    if abs(x - y) < 1e-6 * max(x, y):
        return
    assert phase_ratio(x, -y if flip else y, 2.0) == pytest.approx(1.0, rel=1e-9)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.sampled_from([0.5, 0.9, 0.99]))
def test_phase_ratio_min_law_bounds(x, y, beta):
    if min(abs(x), abs(y)) < 1e-3 or abs(abs(x) - abs(y)) < 1e-6 * max(abs(x), abs(y)):
        return
    q = phase_ratio(x, y, beta) / min_law(x, y, beta)
    assert 0.25 * (1 - 1e-9) <= q <= 1.0 + 1e-9


def test_multiplier_zeros():
    n0 = 16
    # |xi| = N0 / 4 lies below the high-frequency cutoff
    assert multiplier_m(3.0, 1.0, 2.0, n0) == 0
    # |xi2| / |xi| = 1/2 is far outside the low-ratio cutoff
    assert multiplier_m(50.0, 50.0, 2.0, n0) == 0
    assert multiplier_m(100.0, 0.5, 2.0, n0) != 0


def test_bilinear_zero_cases():
    g = Grid(20.0, 512)
    f = Field.from_function(g, lambda x: np.exp(-(x**2)))
    assert np.all(bilinear_B(Field.zeros(g), f, 2.0, 16).values == 0)
    assert np.all(bilinear_B(f, Field.zeros(g), 2.0, 16).values == 0)
    with pytest.raises(InvalidInput):
        BilinearForm(Field.zeros(Grid(20.0, 2**14)), 2.0, 16)


def test_bilinear_killed_by_ratio_cutoff():
    g = Grid(20.0, 512)
    f = Field.from_symbol(g, lambda xi: np.where(np.abs(xi) <= 2, 1.0, 0.0))
    gh = Field.from_symbol(g, lambda xi: np.where((np.abs(xi) >= 10) & (np.abs(xi) <= 20), 1.0, 0.0))
    assert np.all(bilinear_B(f, gh, 2.0, 2).values == 0)


def test_bilinear_support():
    g = Grid(20.0, 2**11)
    m = 64.0
    eta = annulus_bump_potential(g, m, 2.0)
    u = project(Field.from_function(g, lambda x: np.exp(-(x**2))), "<=", 1)
    out = bilinear_B(eta.field, u, 2.0, 16).frequency().values
    a = np.abs(g.xi)
    assert np.max(np.abs(out)) > 0
    # eta^ lives on M/4 <= |xi1| <= 9M/4 (quarter-width ramps in xi/M), u^ on |xi2| <= 2
    outside = (a < m / 4 - 2) | (a > 9 * m / 4 + 2)
    assert np.max(np.abs(out[outside])) <= 1e-14 * np.max(np.abs(out))


def test_bilinear_matches_direct_sum():
    g = Grid(10.0, 128)
    rng = np.random.default_rng(3)
    f = Field(g, rng.normal(size=g.size) * np.exp(-(g.x**2)))
    u = Field(g, rng.normal(size=g.size) * np.exp(-(g.x**2)))
    fh, uh = f.frequency().values, u.frequency().values
    xi = g.xi
    k = 40
    direct = sum(
        g.dxi / (2 * np.pi) * multiplier_m(xi[(k - j) % g.size], xi[j], 2.0, 2) * fh[(k - j) % g.size] * uh[j]
        for j in range(g.size)
    )
    out = bilinear_B(f, u, 2.0, 2).frequency().values
    assert out[k] == pytest.approx(direct, rel=1e-12, abs=1e-300)


def test_resonance_R_trivial_cases():
    g = Grid(20.0, 512)
    eta = mollified_delta(g, 0.5)
    assert l2_norm(resonance_R(eta, Field.zeros(g), 16)) == 0
    wide_eta = Field.from_function(g, lambda x: np.exp(-(x**2) / 8))
    u = Field.from_function(g, lambda x: np.exp(-(x**2) / 8))
    prod = u.pointwise(wide_eta)
    r = resonance_R(wide_eta, u, 16)
    assert l2_norm(r - prod) <= 1e-12 * l2_norm(prod)
    with pytest.raises(InvalidInput):
        resonance_R(eta, u, 16, method="other")


def test_normal_form_config():
    assert NormalFormConfig(eps0=0.1).beta == pytest.approx(0.95)
    with pytest.raises(InvalidInput):
        NormalFormConfig(n0=12)


def _delta_traj(eta, t_final=0.1, dt=1e-3):
    g = eta.grid
    u0 = Field.from_function(g, lambda x: np.exp(-(x**2)))
    return evolve(u0, EvolutionConfig(dt=dt, t_final=t_final, potential=eta, decay_tol=None))


def test_decomposition_free():
    g = Grid(10.0, 256)
    traj = _delta_traj(zero_potential(g), t_final=0.02)
    rep = decomposition_residual(traj, zero_potential(g), NormalFormConfig(s=2.0, n0=16))
    # only the free term survives; the mismatch is stepping roundoff
    assert rep.residual < 1e-11
    assert rep.terms["boundary_t"] == 0 and rep.terms["nonresonant"] == 0


def test_decomposition_at_t0():
    g = Grid(10.0, 512)
    eta = mollified_delta(g, 0.2)
    traj = _delta_traj(eta, t_final=0.01)
    rep = decomposition_residual(traj, eta, NormalFormConfig(s=2.0, n0=16), t_index=0)
    assert rep.residual <= 1e-12


def test_decomposition_mollified_delta():
    g = Grid(10.0, 2**9)
    eta = mollified_delta(g, 0.2)
    traj = _delta_traj(eta)
    rep = decomposition_residual(traj, eta, NormalFormConfig(s=2.0, n0=16))
    assert rep.residual < 1e-3


def test_decomposition_needs_uniform_snapshots():
    g = Grid(10.0, 512)
    eta = mollified_delta(g, 0.2)
    u0 = Field.from_function(g, lambda x: np.exp(-(x**2)))
    traj = evolve(u0, EvolutionConfig(dt=1e-3, t_final=0.0105, potential=eta, snapshot_stride=4, decay_tol=None))
    with pytest.raises(InvalidInput):
        decomposition_residual(traj, eta, NormalFormConfig())


def test_commutator_cases():
    g = Grid(16.0, 256)
    w = Field.from_function(g, lambda x: np.exp(-(x**2)))
    rep = commutator_split_residual(w, constant_potential(g, 1.5), 1.45, 0.95)
    assert rep.terms["commutator"] <= 1e-12 * rep.terms["main"]
    rep = commutator_split_residual(w, sign_jump(g), 1.45, 1.45)
    assert rep.residual <= 1e-12
    rep = commutator_split_residual(w, mollified_delta(g, 0.5), 1.45, 0.95)
    assert rep.residual <= 1e-10
    assert commutator_split_residual(w, mollified_delta(g, 0.5), 1.45, 0.95, n0=16).residual <= 1e-10


def test_min_power_integrals():
    assert min_power_integral_exact(4.0, -2.0) == pytest.approx(1.0)
    assert min_power_integral_exact(1.0, -3.0) == pytest.approx(3.0)
    assert min_power_integral_quad(4.0, -2.0) == pytest.approx(1.0, rel=1e-6)
    assert min_power_integral_quad(1.0, -3.0) == pytest.approx(3.0, rel=1e-6)
    assert min_power_integral_exact(1e6, -2.0) < 1e-5
    with pytest.raises(InvalidInput):
        min_power_integral_exact(1.0, -1.0)


def test_factor_check_passes():
    rep = nonresonant_factor_check()
    assert rep.passed
    for r in rep.beta_ranges.values():
        assert r["min"] >= 0.25 and r["max"] <= 1.0
