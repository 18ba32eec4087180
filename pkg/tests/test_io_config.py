import numpy as np
import pytest

from rpslab import config as cfgmod
from rpslab.errors import InvalidInput
from rpslab.io import decode_field, dumps, encode_field, fmt_float, read_field, write_csv, write_field
from rpslab.spectral import Field, Grid


def test_rpsf_round_trip(tmp_path):
    g = Grid(20.0, 256)
    f = Field.from_function(g, lambda x: np.exp(-(x**2) + 1j * x))
    back = read_field(write_field(tmp_path / "u.rpsf", f))
    assert back.grid == g and back.space == "physical"
    np.testing.assert_array_equal(back.values, f.values)
    fr = decode_field(encode_field(f.frequency()))
    assert fr.space == "frequency"


def test_rpsf_rejects_corruption():
    g = Grid(20.0, 64)
    data = encode_field(Field.zeros(g))
    with pytest.raises(InvalidInput):
        decode_field(b"XXXX" + data[4:])
    with pytest.raises(InvalidInput):
        decode_field(data[:-8])
    with pytest.raises(InvalidInput):
        decode_field(data[:10])


def test_float_format():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(float("inf")) == "Infinity"


def test_json_and_csv_deterministic(tmp_path):
    obj = {"b": [1, 2.5, None], "a": {"y": True, "x": np.float64(1 / 3)}}
    assert dumps(obj) == dumps(dict(reversed(list(obj.items()))))
    assert '"a"' in dumps(obj).splitlines()[1]
    p = write_csv(tmp_path / "x.csv", ["a", "b"], [(1, 0.5), (2, True)])
    assert p.read_text() == "a,b\n1,0.5\n2,true\n"


GOOD = """
[run]
command = solve
out = somewhere

[grid]
half_width = 20
size = 1024

[potential]
kind = mollified_delta
eps = 0.1

[evolution]
dt = 1e-3
t_final = 0.1
norm_orders = 1, 1.5
decay_tol = none

[check.decomposition_residual]
tol = 1e-4
"""


def test_config_round_trip(tmp_path):
    cfg = cfgmod.loads(GOOD)
    assert cfg.command == "solve"
    assert cfg.section("grid")["size"] == 1024
    assert cfg.section("evolution")["norm_orders"] == (1.0, 1.5)
    assert cfg.section("evolution")["decay_tol"] is None
    assert cfg.section("data")["kind"] == "gaussian"
    assert cfg.check_params("decomposition_residual")["tol"] == 1e-4
    path = cfg.save(tmp_path / "c.ini")
    again = cfgmod.load(path)
    assert again == cfg
    assert again.dumps() == cfg.dumps()


@pytest.mark.parametrize(
    "text",
    [
        "[run]\ncommand = solve\n[grid]\nsize = many\n",
        "[run]\ncommand = solve\n[grid]\nsize = 10.5\n",
        "[run]\ncommand = solve\n[grid]\ncolour = red\n",
        "[run]\ncommand = solve\n[mystery]\nx = 1\n",
        "[run]\ncommand = dance\n",
        "[grid]\nsize = 64\n",
        "not an ini file",
        "[run]\ncommand = verify\n[check.nonexistent]\ntol = 1\n",
        "[run]\ncommand = verify\n[check.bernstein]\nbogus = 1\n",
    ],
)
def test_config_rejects(text):
    with pytest.raises(InvalidInput):
        cfgmod.loads(text)


def test_missing_file(tmp_path):
    with pytest.raises(InvalidInput):
        cfgmod.load(tmp_path / "absent.ini")
