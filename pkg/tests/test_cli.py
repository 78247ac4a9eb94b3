import json

import pytest

from sisrewire.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from sisrewire.config import RunConfig, parse_value
from sisrewire.errors import ConfigError
from sisrewire.io import TRAJECTORY_HEADER, read_csv


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_simulate_subthreshold(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sub-threshold\nsystem.tau = 0.04\nrun.T = 10\nrun.u1 = 0\nrun.u2 = 0\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    header, rows = read_csv(tmp_path / "o" / "trajectory.csv")
    assert tuple(header) == TRAJECTORY_HEADER
    assert float(rows[-1][1]) < 10
    assert len(rows) == 101


def test_simulate_plot(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--plot"]) == EXIT_OK
    assert (tmp_path / "trajectory.svg").read_text().startswith("<svg")


def test_malformed_config_names_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("system.tua = 0.1\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "system.tua" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    ["system.tau 0.1\n", "nosection = 1\n", "system.tau = abc\n", "system.N = 2\n", "control.P = 2.5\ncontrol.M1=1\ncontrol.M2=0\n"],
)
def test_other_config_errors(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert main(["nmpc", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_bad_flag():
    assert main(["simulate", "--cost-indexing", "weird"]) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG


def test_numerical_failure_exit(tmp_path):
    args = ["simulate", "--out", str(tmp_path), "--set", "run.u1=100000", "--set", "run.dt=1", "--set", "run.T=1"]
    assert main(args) == EXIT_NUMERIC


def test_regions_single_cell(tmp_path):
    args = ["regions", "--out", str(tmp_path), "--set", "grid.u1_points=1", "--set", "grid.u2_points=1",
            "--set", "grid.hopf_points=0"]
    assert main(args) == EXIT_OK
    header, rows = read_csv(tmp_path / "regions.csv")
    assert header == ["u1", "u2", "class"] and len(rows) == 1
    assert _summary(tmp_path)["transcritical_u1"] == 98.8


def test_regions_default_hopf_curve(tmp_path):
    args = ["regions", "--out", str(tmp_path), "--set", "grid.u1_points=2", "--set", "grid.u2_points=2"]
    assert main(args) == EXIT_OK
    _, rows = read_csv(tmp_path / "hopf.csv")
    assert len(rows) > 0


def test_nmpc_missing_m1(tmp_path, capsys):
    assert main(["nmpc", "--out", str(tmp_path), "--set", "control.M2=0.1"]) == EXIT_CONFIG
    assert "control.M1" in capsys.readouterr().err


def test_nmpc_fig4_controllable(tmp_path):
    cfg = tmp_path / "fig4.cfg"
    cfg.write_text(
        "system.tau = 2\ncontrol.M1 = 18\ncontrol.M2 = 0.001\ncontrol.dt = 0.1\ncontrol.T = 10\n"
        "damping.lambda1 = 1e4\ndamping.lambda2 = 1\ndamping.lambda3 = 1\ndamping.lambda4 = 1\n"
    )
    assert main(["nmpc", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "42"]) == EXIT_OK
    s = _summary(tmp_path / "o")
    assert s["controllable"] is True
    assert s["nmpc"]["seed"] == 42 and s["nmpc"]["lambdas"] == [1e4, 1, 1, 1]


def test_nmpc_fig6_top_not_controllable(tmp_path):
    args = ["nmpc", "--out", str(tmp_path), "--set", "system.tau=1", "--set", "control.M1=6",
            "--set", "control.M2=0.5", "--set", "targets.n_target=10"]
    assert main(args) == EXIT_OK
    assert _summary(tmp_path)["controllable"] is False
    header, rows = read_csv(tmp_path / "controls.csv")
    assert header == ["k", "t", "u1", "u2"] and len(rows) == 100


def test_csv_round_trip(tmp_path):
    main(["nmpc", "--out", str(tmp_path), "--set", "system.tau=1", "--set", "control.M1=7.8",
          "--set", "control.M2=0.5", "--set", "control.T=0.5"])
    _, rows = read_csv(tmp_path / "trajectory.csv")
    for row in rows:
        for cell in row:
            assert repr(float(cell)) == cell


def test_experiment_table2_schema(tmp_path):
    args = ["experiment", "table2", "--out", str(tmp_path), "--set", "scenario.M1_grid=7.8,"]
    assert main(args) == EXIT_OK
    header, rows = read_csv(tmp_path / "table2.csv")
    assert header == ["M1", "n_star"] and len(rows) == 1


def test_experiment_fig5_left_three_curves(tmp_path):
    args = ["experiment", "fig5-left", "--out", str(tmp_path), "--set", "scenario.tau_grid=0.01,"]
    assert main(args) == EXIT_OK
    _, rows = read_csv(tmp_path / "critical_curves.csv")
    assert sorted({r[1] for r in rows}) == ["0.001", "0.1", "0.5"]


def test_experiment_unknown(tmp_path):
    assert main(["experiment", "nosuch", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_flags_reach_config():
    from sisrewire.cli import build_parser, load_config

    args = build_parser().parse_args(["nmpc", "--literal-paper-ss", "--cost-indexing", "literal", "--seed", "7",
                                      "--set", "control.M1=2", "--set", "control.M2=0"])
    cfg = load_config(args)
    assert cfg.system_params().literal_ss is True
    n = cfg.nmpc_config()
    assert n.cost_indexing == "literal" and n.seed == 7


def test_parse_value():
    assert parse_value("3") == 3 and parse_value("1e-3") == 1e-3
    assert parse_value("true") is True and parse_value("shifted") == "shifted"
    assert parse_value("0.1, 0.2") == (0.1, 0.2)


def test_run_config_rejects_unknown():
    with pytest.raises(ConfigError):
        RunConfig.parse("damping.lambda5 = 1\n")
    with pytest.raises(ConfigError):
        RunConfig.parse("grid.u1_points = 1\ngrid.u2_min = 0\n").grid()
