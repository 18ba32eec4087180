import numpy as np
import pytest

from rpslab.errors import InvalidInput
from rpslab.evolution import EvolutionConfig, evolve
from rpslab.potentials import mollified_delta
from rpslab.regularity import (
    SMOOTH,
    DeltaRun,
    ThresholdTable,
    estimate_regularity,
    jump_probe,
    power_law_field,
    threshold_experiment,
)
from rpslab.spectral import Field, Grid


@pytest.fixture(scope="module")
def big_grid():
    return Grid(50.0, 2**14)


def test_gaussian_is_smooth(big_grid):
    est = estimate_regularity(Field.from_function(big_grid, lambda x: np.exp(-(x**2))))
    assert est.verdict == SMOOTH
    assert est.smooth


@pytest.mark.parametrize("sigma,expected", [(2.0, 1.5), (2.5, 2.0)])
def test_power_law_recovery(big_grid, sigma, expected):
    est = estimate_regularity(power_law_field(big_grid, sigma))
    assert est.s_est == pytest.approx(expected, abs=0.1)
    assert est.window[0] == 4


def test_window_validation(big_grid):
    f = power_law_field(big_grid, 2.0)
    with pytest.raises(InvalidInput):
        estimate_regularity(f, window=(16, 64))
    with pytest.raises(InvalidInput):
        estimate_regularity(f, window=(4, 2**20))
    with pytest.raises(InvalidInput):
        estimate_regularity(f, window=(64, 4))


def _smooth_u(grid):
    return Field.from_function(grid, lambda x: np.exp(-(x**2)) * (1 + 0.3j * x))


def test_jump_free_solution_is_zero():
    g = Grid(20.0, 2**14)
    u = evolve(_smooth_u(g), EvolutionConfig(dt=1e-2, t_final=0.2)).final
    # a quartic fit on [2 dx, 10 dx] leaves only the x^6 term of the even part
    rep = jump_probe(u, mass=0.0, degree=4)
    assert rep.predicted == 0
    assert rep.relative_error < 1e-6
    # the default quadratic fit is biased by the x^4 term, still small
    assert jump_probe(u, mass=0.0).relative_error < 1e-4


def test_jump_linear_in_u():
    g = Grid(40.0, 2**13)
    eta = mollified_delta(g, 0.1)
    u = evolve(_smooth_u(g), EvolutionConfig(dt=1e-3, t_final=0.1, potential=eta, decay_tol=None)).final
    a = jump_probe(u, 1.0, 0.1)
    b = jump_probe(u * 2.0, 1.0, 0.1)
    assert b.jump == pytest.approx(2 * a.jump, rel=1e-12)
    assert b.predicted == pytest.approx(2 * a.predicted, rel=1e-12)
    assert b.relative_error == pytest.approx(a.relative_error, rel=1e-9)


def test_jump_window_guard():
    g = Grid(2.0, 256)
    with pytest.raises(InvalidInput):
        jump_probe(_smooth_u(g), 1.0, eps=0.5)


def test_table_verdicts(tmp_path):
    table = ThresholdTable(
        "synthetic", (1, 2, 3, 4), (1.0, 2.0, 3.0),
        {1.0: [1.0, 1.1, 1.2, 1.1], 2.0: [1.0, 2.0, 4.0, 8.0], 3.0: [1.0, 5.0, 2.0, 6.0]},
    )
    assert table.verdict(1.0) == "bounded"
    assert table.verdict(2.0) == "growing"
    assert table.verdict(3.0) == "indeterminate"
    path = table.to_csv(tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "ladder_value,s,norm,verdict"
    assert len(lines) == 13


def test_delta_step_rule():
    run = DeltaRun()
    assert run.step_for(0.2) == 1e-3
    assert run.step_for(0.025) == pytest.approx(0.15 * 0.025**2)
    assert DeltaRun(dt=5e-4).step_for(0.025) == 5e-4


def test_annulus_family_splits_at_threshold():
    table = threshold_experiment("annulus_M", (2.0, 2.25), (32, 64, 128, 256, 512), r=2.0)
    # the oracle norm scales like M^{s - 2}: flat at s = 2 and growing (slowly) above
    assert table.verdict(2.0) == "bounded"
    assert table.monotone(2.25)
    assert table.growth(2.25) > table.growth(2.0)


def test_threshold_validation():
    with pytest.raises(InvalidInput):
        threshold_experiment("delta_eps", (1.4,), (0.1,))
    with pytest.raises(InvalidInput):
        threshold_experiment("other", (1.4,), (0.1, 0.05))


def test_small_delta_ladder_runs():
    run = DeltaRun(half_width=20.0, size=2**11, t_final=0.1)
    table = threshold_experiment("delta_eps", (1.0, 1.4), (0.2, 0.1), delta=run)
    assert len(table.jumps) == 2
    assert table.jumps[-1].relative_error < table.jumps[0].relative_error
