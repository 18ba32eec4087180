import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rpslab.errors import InvalidInput
from rpslab.littlewood_paley import (
    BERNSTEIN_CONSTANT,
    CALIBRATION_GRID,
    PHI,
    DyadicSpectrum,
    band_energies,
    band_symbol,
    check_bernstein,
    corpus_max_ratio,
    dyadic_bands,
    make_cutoff,
    project,
    smoothstep,
    top_band,
)
from rpslab.spectral import Field, Grid, abs_power, apply_multiplier, l2_norm


def test_cutoff_values():
    chi = make_cutoff("annulus", 0.5, 2.0)
    assert chi(1.0) == 1.0
    assert chi(3.0) == 0.0
    assert chi(0.25) == 0.0
    assert chi(2.25) == 0.0
    assert PHI(0.5) == 1.0
    assert PHI(2.0) == 0.0
    assert PHI(1.5) == pytest.approx(0.5)


def test_cutoff_validation():
    with pytest.raises(InvalidInput):
        make_cutoff("annulus", 2.0, 1.0)
    with pytest.raises(InvalidInput):
        make_cutoff("annulus", 0.2, 1.0)
    with pytest.raises(InvalidInput):
        make_cutoff("ring", 1.0, 2.0)


@given(st.floats(-10, 10))
def test_profiles_in_unit_interval(r):
    for prof in (PHI, make_cutoff("annulus", 0.5, 2.0), make_cutoff("annulus", 3.0, 7.5)):
        v = float(prof(r))
        assert 0.0 <= v <= 1.0


def test_smoothstep_is_c2():
    h = 1e-4
    t = np.array([0.0, 1.0])
    # first and second one-sided derivatives vanish at both ends
    d1 = (smoothstep(t + h) - smoothstep(t - h)) / (2 * h)
    d2 = (smoothstep(t + h) - 2 * smoothstep(t) + smoothstep(t - h)) / h**2
    assert np.all(np.abs(d1) < 1e-6)
    assert np.all(np.abs(d2) < 1e-3)


def test_bands_telescope():
    r = np.linspace(0, 300, 3001)
    total = sum(band_symbol(r, n) for n in [1, 2, 4, 8, 16, 32, 64, 128])
    np.testing.assert_allclose(total, PHI(r / 128), atol=1e-15)


def test_cos8_concentrates_in_band_8():
    g = Grid(np.pi * 2**3, 2**10)
    f = Field.from_function(g, lambda x: np.cos(8 * x))
    p8 = project(f, "=", 8)
    assert l2_norm(p8) ** 2 / l2_norm(f) ** 2 >= 0.99
    spec = band_energies(f)
    assert spec.ns[np.argmax(spec.energies)] == 8
    assert np.sum(spec.energies**2) == pytest.approx(l2_norm(f) ** 2, rel=0.01)


def test_low_frequency_containment():
    g = Grid(40.0, 2**10)
    f = Field.from_symbol(g, lambda xi: np.exp(-1.0 / np.maximum(1e-12, 1 - xi**2)) * (np.abs(xi) < 1))
    assert l2_norm(project(f, "=", 1) - f) <= 1e-14 * l2_norm(f)


def test_projection_rejects_bad_n(gaussian):
    with pytest.raises(InvalidInput):
        project(gaussian, "<=", 3)
    with pytest.raises(InvalidInput):
        project(gaussian, "<=", 2 * top_band(gaussian.grid))


def test_idempotence_away_from_ramps():
    # spectrum inside |xi| <= 3 and beyond 40: P_{<=4} and P_{>=16} act as 0/1 there
    g = Grid(20.0, 2**10)
    x = g.x
    f = Field(g, np.exp(-(x**2) / 8) + np.exp(-(x**2) / 8 + 60j * x) * 1e-3)
    for sel, n in (("<=", 4), (">=", 16)):
        once = project(f, sel, n)
        twice = project(once, sel, n)
        assert l2_norm(twice - once) <= 1e-12 * l2_norm(f)


def test_partition_of_unity(gaussian):
    spec = band_energies(gaussian)
    assert l2_norm(spec.reconstruct() - gaussian) <= 1e-10 * l2_norm(gaussian)


def test_band_support():
    g = Grid(20.0, 2**11)
    rng = np.random.default_rng(1)
    f = Field(g, rng.normal(size=g.size) + 1j * rng.normal(size=g.size))
    for n in (2, 4, 16, 64):
        ph = project(f, "=", n).frequency().values
        outside = (np.abs(g.xi) < n / 2 - 1) | (np.abs(g.xi) > 2 * n + 1)
        assert np.max(np.abs(ph[outside])) <= 1e-14 * np.max(np.abs(ph))


def test_gaussian_energy_decay(gaussian):
    spec = band_energies(gaussian)
    e = dict(zip(spec.ns, spec.energies))
    for n in (8, 16):
        assert e[2 * n] <= e[n] / 10


def test_zero_field_energies(grid):
    spec = band_energies(Field.zeros(grid))
    assert np.all(spec.energies == 0)
    assert np.all(spec.fractions() == 0)


def test_spectrum_csv(tmp_path, gaussian):
    spec = band_energies(gaussian)
    path = spec.to_csv(tmp_path / "bands.csv")
    assert path.read_text().splitlines()[0] == "N,energy,energy_fraction"
    rows = DyadicSpectrum.read_csv(path)
    assert [r[0] for r in rows] == dyadic_bands(gaussian.grid)
    assert rows[0][1] == spec.energies[0]


def test_bernstein_reports():
    g = Grid(40.0, 2**11)
    f = Field.from_function(g, lambda x: np.cos(16 * x) * np.exp(-(x**2) / 100))
    rep = check_bernstein(f, 16, 2, np.inf)
    assert 0 < rep.ratio <= BERNSTEIN_CONSTANT
    assert not check_bernstein(Field.zeros(g), 16, 2, np.inf).defined
    with pytest.raises(InvalidInput):
        check_bernstein(f, 16, 4, 2)


def test_derivative_bernstein_single_band():
    g = Grid(40.0, 2**11)
    f = Field.from_function(g, lambda x: np.cos(16 * x) * np.exp(-(x**2) / 100))
    for s in (0.5, 1.0, 2.0):
        rep = check_bernstein(f, 16, 2, 2, s=s)
        assert 2 ** (-s - 1) <= rep.derivative_ratio <= 2 ** (s + 1)
        d = apply_multiplier(project(f, "=", 16), lambda xi: abs_power(xi, s))
        assert l2_norm(d) / (16**s * l2_norm(project(f, "=", 16))) == pytest.approx(rep.derivative_ratio)


def test_calibrated_constant_is_twice_corpus_max():
    assert BERNSTEIN_CONSTANT == pytest.approx(2 * corpus_max_ratio(CALIBRATION_GRID), rel=1e-12)
