from pathlib import Path

import numpy as np
import pytest

from hidden_gda.config import KINDS, ConfigError, load_config, loads
from hidden_gda.integrate import RK4, RK45

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.cfg"))

CYCLE = """
kind = cycle2x2
seed = 7
[game]
U = [[2, -1], [-1, 1]]
[fields]
f = sigmoid
g = sigmoid
[init]
theta = [0.5, -1.0]
phi = [0.0, 0.3]
"""


def diagnostics(text):
    with pytest.raises(ConfigError) as info:
        loads(text)
    return info.value.diagnostics


def test_shipped_configs_validate():
    assert len(CONFIGS) >= 7
    kinds = {load_config(path).kind for path in CONFIGS}
    assert kinds == set(KINDS)


def test_minimal_cycle_config():
    cfg = loads(CYCLE)
    assert cfg.kind == "cycle2x2" and cfg.seed == 7
    assert isinstance(cfg.method, RK45) and cfg.method.rtol == 1e-9
    assert cfg.horizon == 2000.0
    np.testing.assert_array_equal(cfg.init["theta"], [0.5, -1.0])
    assert cfg.analysis["period_eps"] == 1e-3


def test_game_from_p_q_v():
    cfg = loads(CYCLE.replace("U = [[2, -1], [-1, 1]]", "p = 0.7\nq = 0.4\nv = 4"))
    assert cfg.game.U.shape == (2, 2)


def test_field_specs_with_parameters():
    cfg = loads(CYCLE.replace("f = sigmoid", "f = affine_sigmoid a=0.8 b=0.2"))
    assert cfg.f_fields[0].params == {"a": 0.8, "b": 0.2}


def test_comments_and_blank_lines_are_ignored():
    assert loads("# header\n\n" + CYCLE.replace("seed = 7", "seed = 7  # trailing")).seed == 7


def test_wrong_matrix_shape_for_2x2_kind():
    (d,) = diagnostics(CYCLE.replace("[[2, -1], [-1, 1]]", "[[1, 0, 2], [0, 1, -3]]"))
    assert d.path == "game.U" and "2x2" in d.reason
    assert d.line == 5


def test_negative_step_is_a_range_diagnostic():
    (d,) = diagnostics(CYCLE + "[integrator]\nmethod = rk4\nstep = -0.001\n")
    assert d.path == "integrator.step" and "> 0" in d.reason


@pytest.mark.parametrize("extra, path, fragment", [
    ("[integrator]\nmethod = rk4\nrtol = 1e-9\n", "integrator.rtol", "rk45"),
    ("[integrator]\nstep = 0.01\n", "integrator.step", "rk4"),
    ("[init]\n", "init", "duplicate"),
    ("[plots]\nwidth = 3\n", "plots", "unknown section"),
    ("[analysis]\nperiod_epsilon = 1\n", "analysis.period_epsilon", "unknown key"),
    ("[analysis]\nwarmup = 5000\n", "analysis.warmup", "horizon"),
    ("[integrator]\nhorizon = 1\nsample_every = 2\n", "integrator.sample_every", "horizon"),
    ("[spurious]\np = 0.4\n", "spurious", "only valid"),
])
def test_diagnostics(extra, path, fragment):
    diags = diagnostics(CYCLE + extra)
    assert any(d.path == path and fragment in d.reason for d in diags), diags


@pytest.mark.parametrize("old, new, path", [
    ("kind = cycle2x2", "kind = cycles", "kind"),
    ("seed = 7", "seed = -1", "seed"),
    ("f = sigmoid", "f = bump A=2 B=0.5", "fields.f"),
    ("phi = [0.0, 0.3]", "phi = [0.0]", "init.theta"),
    ("[game]\nU = [[2, -1], [-1, 1]]", "[game]\nU = [[1, 1], [1, 1]]", "game.U"),
])
def test_value_diagnostics(old, new, path):
    diags = diagnostics(CYCLE.replace(old, new))
    assert any(d.path == path for d in diags), diags


def test_missing_kind_and_game():
    diags = diagnostics("seed = 1\n")
    assert diags[0].path == "kind"
    diags = diagnostics("kind = cycle2x2\n[init]\ntheta = [0]\nphi = [0]\n")
    assert any(d.path == "game" for d in diags)


def test_discrete_energy_requires_sigmoids():
    text = CYCLE.replace("cycle2x2", "discrete_energy").replace("f = sigmoid", "f = affine_sigmoid a=0.1 b=0.8")
    assert any("sigmoid" in d.reason for d in diagnostics(text))


def test_multi_init_shapes():
    text = """
kind = recurrence_multi
[game]
U = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]
[init]
theta = [[0, 0, 0]]
phi = [[0, 0]]
"""
    assert any(d.path == "init.phi" for d in diagnostics(text))


def test_spurious_construction_section():
    cfg = loads("kind = spurious\n[spurious]\nconstruct = bump\np = 0.4\nq = 0.5\n[init]\nmode = disk\n")
    assert cfg.spurious["margin"] == 0.1 and isinstance(cfg.method, RK4)
    diags = diagnostics("kind = spurious\n[spurious]\nconstruct = bump\np = 0.4\n[init]\nmode = disk\n")
    assert any(d.path == "spurious.q" for d in diags)


def test_malformed_lines_report_line_numbers():
    diags = diagnostics("kind = cycle2x2\nthis is not valid\n[game\n")
    assert [d.line for d in diags] == [2, 3]


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
