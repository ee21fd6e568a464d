"""Config parsing: full-field round trip and error accumulation."""

from pathlib import Path

import numpy as np
import pytest

from semihydro.config import (CHECK_NAMES, ConfigError, parse_config,
                              parse_initial_spec)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

FULL = """
[model]
gamma = 2.0

[doping]
profile = sine:1:0.5:1

[initial]
n0 = doping-match
J0 = constant:0

[solver]
epsilon = 1e-3
N = 400
T_final = 20
cfl_safety = 0.5
scheme = central
boundary = float
relaxation = explicit
output_stride = 25

[diagnostics]
checks = region, decay, mass
fit_window = 2, 18
lambda_margin = 1.5
region_M = auto
entropy_tol_factor = 10

[output]
dir = results
"""

MINIMAL = """
[model]
gamma = 2.0
[doping]
profile = constant:1
[solver]
epsilon = 1e-3
N = 200
T_final = 5
"""


def test_full_round_trip():
    cfg = parse_config(FULL)
    assert cfg.gamma == 2.0
    assert cfg.doping_spec == "sine:1:0.5:1"
    assert cfg.epsilon == 1e-3
    assert cfg.N == 400
    assert cfg.T_final == 20.0
    assert cfg.boundary == "float"
    assert cfg.output_stride == 25
    assert cfg.checks == ("region", "decay", "mass")
    assert cfg.fit_window == (2.0, 18.0)
    assert cfg.region_M is None
    assert cfg.out_dir == "results"


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.n0_spec == "doping-match"
    assert cfg.J0_spec == "constant:0"
    assert cfg.cfl_safety == 0.5
    assert cfg.scheme == "central"
    assert cfg.boundary == "dirichlet"
    assert cfg.checks == CHECK_NAMES
    assert cfg.lambda_margin == 1.5
    assert cfg.out_dir == "out"


def test_all_errors_are_accumulated():
    bad = """
[model]
gamma = 5.0
[doping]
profile = wedge:1
[solver]
epsilon = -1
N = 4
T_final = 5
scheme = upwind
"""
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    msg = str(exc.value)
    assert "1 < gamma <= 3" in msg
    assert "doping spec" in msg
    assert "epsilon must be positive" in msg
    assert "N must be at least 16" in msg
    assert "scheme must be central or rusanov" in msg
    assert len(exc.value.errors) == 5


def test_missing_required_keys():
    with pytest.raises(ConfigError) as exc:
        parse_config("[model]\ngamma = 2.0\n")
    msg = str(exc.value)
    assert "'profile'" in msg
    assert "'epsilon'" in msg
    assert "'N'" in msg
    assert "'T_final'" in msg


def test_unknown_sections_and_keys():
    text = MINIMAL + "\n[extras]\nfoo = 1\n"
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(text)
    text = MINIMAL.replace("T_final = 5", "T_final = 5\nwidth = 3")
    with pytest.raises(ConfigError, match="unknown key 'width'"):
        parse_config(text)


def test_type_errors_reported():
    text = MINIMAL.replace("N = 200", "N = many")
    with pytest.raises(ConfigError, match="not a valid int"):
        parse_config(text)


def test_diagnostics_validation():
    text = MINIMAL + "\n[diagnostics]\nchecks = region, sparkle\n"
    with pytest.raises(ConfigError, match="unknown check 'sparkle'"):
        parse_config(text)
    text = MINIMAL + "\n[diagnostics]\nfit_window = 8, 3\n"
    with pytest.raises(ConfigError, match="lo < hi"):
        parse_config(text)
    text = MINIMAL + "\n[diagnostics]\nlambda_margin = 0.5\n"
    with pytest.raises(ConfigError, match="must exceed 1"):
        parse_config(text)
    text = MINIMAL + "\n[diagnostics]\nregion_M = big\n"
    with pytest.raises(ConfigError, match="auto or a number"):
        parse_config(text)
    cfg = parse_config(MINIMAL + "\n[diagnostics]\nregion_M = 12\n")
    assert cfg.region_M == 12.0


def test_syntax_error_is_wrapped():
    with pytest.raises(ConfigError, match="config syntax"):
        parse_config("not an ini file at all\n")


def test_inline_comments_allowed():
    cfg = parse_config(MINIMAL.replace("N = 200", "N = 200  # grid"))
    assert cfg.N == 200


def test_parse_initial_spec_shapes():
    assert parse_initial_spec("doping-match") == "doping-match"
    f = parse_initial_spec("constant:0")
    assert np.all(f(np.linspace(0, 1, 5)) == 0.0)
    f = parse_initial_spec("constant:-0.3")  # currents may be negative
    assert f(0.5) == pytest.approx(-0.3)
    f = parse_initial_spec("sine:1:0.5:1")
    assert f(0.25) == pytest.approx(1.5)
    with pytest.raises(ValueError, match="initial spec"):
        parse_initial_spec("nope:1")
    with pytest.raises(ValueError, match="non-numeric"):
        parse_initial_spec("constant:x")


def test_parse_initial_spec_table(tmp_path):
    p = tmp_path / "n0.csv"
    p.write_text("0.0,1.0\n1.0,2.0\n")
    f = parse_initial_spec(f"table:{p}")
    assert f(0.5) == pytest.approx(1.5)
    with pytest.raises(ValueError, match="cannot read"):
        parse_initial_spec(f"table:{tmp_path / 'nope.csv'}")


def test_shipped_configs_parse():
    paths = sorted(CONFIG_DIR.glob("*.ini"))
    assert len(paths) == 3
    for p in paths:
        cfg = parse_config(p.read_text())
        assert cfg.gamma == 2.0
        assert cfg.epsilon > 0.0
        assert cfg.T_final > 0.0
