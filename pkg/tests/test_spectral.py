import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rpslab.errors import BoundaryContamination, InvalidInput
from rpslab.spectral import (
    Field,
    Grid,
    apply_multiplier,
    check_decay,
    forward_transform,
    free_propagate,
    inverse_transform,
    japanese,
    l2_norm,
    lp_norm,
    mixed_norm,
    sobolev_norm,
)

SQRT_PI = 1.7724538509055159  # int e^{-x^2} dx
GAUSS_L2 = (np.pi / 2) ** 0.25  # ||e^{-x^2}||_2 = 1.1195...


def test_grid_validation():
    with pytest.raises(InvalidInput):
        Grid(10.0, 100)
    with pytest.raises(InvalidInput):
        Grid(10.0, 8)
    with pytest.raises(InvalidInput):
        Grid(-1.0, 64)
    g = Grid(np.pi, 64)
    assert g.dx * g.size == pytest.approx(2 * np.pi)
    assert g.xi[1] == pytest.approx(1.0)
    assert g.xi.min() == pytest.approx(-32.0)  # single unpaired Nyquist mode


def test_for_band():
    g = Grid.for_band(100.0, 0.05)
    assert g.dxi <= 0.05 + 1e-15
    assert g.nyquist > 100.0


def test_forward_gaussian_values(grid, gaussian):
    fh = forward_transform(gaussian)
    assert fh.values[0].real == pytest.approx(SQRT_PI, abs=1e-10)
    # on L = 10 pi the lattice spacing is 1/10, so xi = 2 is a node
    g = Grid(10 * np.pi, 2**11)
    fh = forward_transform(Field.from_function(g, lambda x: np.exp(-(x**2))))
    assert g.xi[20] == pytest.approx(2.0, abs=1e-14)
    assert fh.values[20].real == pytest.approx(SQRT_PI * np.exp(-1.0), abs=1e-10)
    assert abs(fh.values[20].imag) < 1e-12


def test_zero_transforms(grid):
    z = Field.zeros(grid)
    assert np.all(z.frequency().values == 0)
    assert np.all(Field.zeros(grid, "frequency").physical().values == 0)


def test_inverse_of_gaussian_pair(grid):
    g = Field.from_symbol(grid, lambda xi: SQRT_PI * np.exp(-(xi**2) / 4))
    np.testing.assert_allclose(inverse_transform(g).values, np.exp(-grid.x**2), atol=1e-10)


def test_round_trip(grid, gaussian):
    back = gaussian.frequency().physical()
    assert l2_norm(back - gaussian) / l2_norm(gaussian) < 1e-12


def test_space_checks(grid, gaussian):
    with pytest.raises(InvalidInput):
        inverse_transform(gaussian)
    with pytest.raises(InvalidInput):
        forward_transform(gaussian.frequency())
    with pytest.raises(InvalidInput):
        Field(grid, np.full(grid.size, np.nan))


def test_multiplier_second_derivative(grid, gaussian):
    out = apply_multiplier(gaussian, lambda xi: xi**2)
    np.testing.assert_allclose(out.values, (2 - 4 * grid.x**2) * np.exp(-grid.x**2), atol=1e-8)


def test_multiplier_identity_and_rejects_nonfinite(grid, gaussian):
    np.testing.assert_allclose(apply_multiplier(gaussian, 1.0).values, gaussian.values, atol=1e-14)
    np.testing.assert_allclose(apply_multiplier(gaussian, lambda xi: japanese(xi, 0)).values, gaussian.values, atol=1e-14)
    with pytest.raises(InvalidInput):
        with np.errstate(divide="ignore"):
            apply_multiplier(gaussian, lambda xi: 1 / xi)


def test_free_propagation_closed_form(grid, gaussian):
    t = 0.5
    a = 1 + 4j * t
    out = free_propagate(gaussian, t)
    np.testing.assert_allclose(out.values, a**-0.5 * np.exp(-grid.x**2 / a), atol=1e-8)
    assert free_propagate(gaussian, 0.0) is gaussian


def test_sobolev_values(grid, gaussian):
    assert sobolev_norm(gaussian, 0).value == pytest.approx(GAUSS_L2, rel=1e-12)
    assert sobolev_norm(gaussian, 0).value == pytest.approx(l2_norm(gaussian), rel=1e-12)
    # (1/2pi) int <xi>^3 pi e^{-xi^2/2} dxi by adaptive quadrature
    from scipy.integrate import quad

    ref = np.sqrt(quad(lambda z: (1 + z * z) ** 1.5 * np.pi * np.exp(-z * z / 2) / (2 * np.pi), -np.inf, np.inf, epsabs=1e-14)[0])
    assert sobolev_norm(gaussian, 1.5).value == pytest.approx(ref, rel=1e-10)
    assert sobolev_norm(Field.zeros(grid), 2.0).value == 0


def test_lp_norms(grid, gaussian):
    assert lp_norm(gaussian, 1).value == pytest.approx(SQRT_PI, rel=1e-10)
    assert lp_norm(gaussian, np.inf).value == pytest.approx(1.0)
    with pytest.raises(InvalidInput):
        lp_norm(gaussian, 0.5)


def test_mixed_norms(grid, gaussian):
    traj = [(t, free_propagate(gaussian, t)) for t in np.linspace(0, 1, 11)]
    assert mixed_norm(traj, np.inf, 2).value == pytest.approx(GAUSS_L2, rel=1e-10)
    const = [(t, gaussian) for t in (0.0, 0.5, 1.0)]
    assert mixed_norm(const, np.inf, 1).value == pytest.approx(SQRT_PI, rel=1e-10)
    assert mixed_norm(const, 2, 2).value == pytest.approx(GAUSS_L2, rel=1e-10)
    zero = [(t, Field.zeros(grid)) for t in (0.0, 1.0)]
    assert mixed_norm(zero, 2, 2, "x-outer").value == 0
    with pytest.raises(InvalidInput):
        mixed_norm([(0.0, gaussian)], 2, 2)
    with pytest.raises(InvalidInput):
        mixed_norm([(1.0, gaussian), (0.0, gaussian)], np.inf, 2)


def test_decay_guard():
    g = Grid(5.0, 256)
    with pytest.raises(BoundaryContamination):
        check_decay(Field.from_function(g, lambda x: np.exp(-(x**2) / 16)))
    assert check_decay(Field.from_function(g, lambda x: np.exp(-(x**2)))) < 1e-8


coeffs = st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3)


def _packet(grid, c):
    x = grid.x
    return Field(grid, c[0] * np.exp(-(x**2)) + c[1] * np.exp(-((x - 1) ** 2) * 2 + 3j * x) + c[2] * np.exp(-((x + 2) ** 2)))


@given(coeffs)
def test_parseval(c):
    g = Grid(20.0, 512)
    f = _packet(g, c)
    fh = f.frequency().values
    lhs = l2_norm(f) ** 2
    rhs = g.dxi / (2 * np.pi) * np.sum(np.abs(fh) ** 2)
    assert rhs == pytest.approx(lhs, rel=1e-12, abs=1e-300)


@given(coeffs, st.floats(-2, 2), st.floats(-2, 2))
def test_unitarity_and_group_law(c, t1, t2):
    g = Grid(20.0, 512)
    f = _packet(g, c)
    a = free_propagate(free_propagate(f, t1), t2)
    b = free_propagate(f, t1 + t2)
    scale = max(l2_norm(f), 1e-300)
    assert l2_norm(a - b) / scale < 1e-12
    assert l2_norm(free_propagate(f, t1)) == pytest.approx(l2_norm(f), rel=1e-12, abs=1e-300)


@given(coeffs, st.floats(-1, 1))
def test_multipliers_compose_and_commute(c, t):
    g = Grid(20.0, 512)
    f = _packet(g, c)
    m1 = lambda xi: japanese(xi, 1.5)  # noqa: E731
    m2 = lambda xi: np.exp(-(xi**2) / 50)  # noqa: E731
    seq = apply_multiplier(apply_multiplier(f, m1), m2)
    once = apply_multiplier(f, lambda xi: m1(xi) * m2(xi))
    scale = max(l2_norm(seq), 1e-300)
    assert l2_norm(seq - once) / scale < 1e-12
    pa = free_propagate(apply_multiplier(f, m1), t)
    pb = apply_multiplier(free_propagate(f, t), m1)
    assert l2_norm(pa - pb) / scale < 1e-12


@given(coeffs, st.floats(0, 3), st.floats(0, 3))
def test_sobolev_monotone(c, s1, s2):
    g = Grid(20.0, 512)
    f = _packet(g, c)
    lo, hi = sorted((s1, s2))
    assert sobolev_norm(f, lo).value <= sobolev_norm(f, hi).value * (1 + 1e-14)
