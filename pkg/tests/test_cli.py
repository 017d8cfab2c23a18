"""Command-line interface: parsing, output formats, determinism, exit codes."""
import json

import numpy as np
import pytest

from stagwalk import QuadratureError, cli
from stagwalk.cli import main, parse_angle, parse_state


def test_parse_angle():
    assert parse_angle("pi") == pytest.approx(np.pi)
    assert parse_angle("pi/3") == pytest.approx(np.pi / 3)
    assert parse_angle("2pi/3") == pytest.approx(2 * np.pi / 3)
    assert parse_angle("-pi/4") == pytest.approx(-np.pi / 4)
    assert parse_angle("2*pi") == pytest.approx(2 * np.pi)
    assert parse_angle("0.75") == 0.75
    assert parse_angle("-1.5e-2") == -0.015
    with pytest.raises(ValueError):
        parse_angle("three")


def test_parse_state():
    vals = parse_state("0.5, 0.5, 0.5, 0.5", 4)
    assert np.allclose(vals, 0.5)
    vals = parse_state("0.70710678118654752, 0.70710678118654752i", 2)
    assert np.allclose(vals, [1 / np.sqrt(2), 1j / np.sqrt(2)], atol=1e-12)
    with pytest.raises(ValueError):
        parse_state("1, 1", 2)  # not normalized
    with pytest.raises(ValueError):
        parse_state("1, 0, 0", 2)  # wrong length


def test_simulate_csv_outputs_and_determinism(tmp_path):
    args = ["simulate", "--model", "coinless1d", "--alpha", "pi/3",
            "--beta", "pi/3", "--steps", "10,20", "--format", "csv",
            "--output", str(tmp_path / "run")]
    assert main(args) == 0
    moments = (tmp_path / "run_moments.csv").read_text("ascii")
    dist = (tmp_path / "run_distribution.csv").read_text("ascii")
    lines = moments.strip().splitlines()
    assert lines[0] == "t,mean_x,mean_x2,var_x,sigma2_total"
    ts = [int(row.split(",")[0]) for row in lines[1:]]
    assert ts == [10, 20]
    # values round-trip exactly through the text format
    var20 = float(lines[-1].split(",")[3])
    assert 0.9 * 400 * 0.8 < var20 < 400 * 1.1

    head, *rows = dist.strip().splitlines()
    assert head == "x,probability"
    total = sum(float(r.split(",")[1]) for r in rows)
    assert total == pytest.approx(1.0, abs=1e-9)

    assert main(args) == 0
    assert (tmp_path / "run_moments.csv").read_text("ascii") == moments
    assert (tmp_path / "run_distribution.csv").read_text("ascii") == dist


def test_simulate_json_structure(tmp_path):
    out = tmp_path / "walk"
    assert main(["simulate", "--model", "grover2d", "--steps", "8",
                 "--format", "json", "--output", str(out)]) == 0
    doc = json.loads((tmp_path / "walk.json").read_text("ascii"))
    assert set(doc) == {"config", "moments", "distribution"}
    assert doc["config"]["model"] == "grover2d"
    assert isinstance(doc["moments"], list)
    assert doc["moments"][-1]["t"] == 8
    assert {"mean_x", "mean_y", "var_x", "sigma2_total"} <= set(doc["moments"][-1])
    assert doc["distribution"]["columns"] == ["x", "y", "probability"]
    probs = [row[-1] for row in doc["distribution"]["rows"]]
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)


def test_moments_subcommand_json(capsys):
    assert main(["moments", "--model", "coinless1d",
                 "--alpha", "pi/3", "--beta", "pi/3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["variance"] == pytest.approx(1.0, abs=1e-8)
    assert doc["closed_form"]["variance"] == 1.0
    assert doc["closed_form"]["branch"] in ("alpha+", "beta+")


def test_moments_subcommand_2d(capsys):
    assert main(["moments", "--model", "coinless2d"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["msd"] == pytest.approx(8 * (1 - 2 / np.pi), abs=1e-12)


def test_sweep_subcommand_with_refinement(tmp_path, capsys):
    out = tmp_path / "surface.csv"
    code = main(["sweep", "--manifold", "hadamard-sigma",
                 "--resolution", "9", "--refine", "--output", str(out)])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["manifold"] == "hadamard-sigma"
    assert doc["refined"]["value"] == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-9)
    text = out.read_text("ascii").strip().splitlines()
    assert text[0] == "alpha,phi,value"
    assert len(text) == 1 + 81


def test_verify_selected_checks(capsys):
    code = main(["verify", "--t", "30", "--check", "ballistic-1d",
                 "--check", "reflection-properties"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    names = {c["name"] for c in doc["checks"]}
    assert names == {"ballistic-1d", "reflection-properties"}
    assert doc["passed"] is True


def test_verify_list(capsys):
    assert main(["verify", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert "crosspath-2d" in names
    assert len(names) == 11


def test_usage_errors_exit_one():
    assert main(["simulate", "--model", "bogus"]) == 1
    assert main(["verify", "--check", "no-such-check"]) == 1
    assert main(["simulate", "--model", "coinless1d", "--alpha", "nope"]) == 1


def test_verify_failure_exits_two(monkeypatch):
    monkeypatch.setattr(
        cli, "_CHECKS", (("stub", lambda t, rng: (False, {"reason": "x"})),)
    )
    assert main(["verify", "--t", "5"]) == 2


def test_quadrature_failure_exits_three(monkeypatch):
    def explode(*args, **kwargs):
        raise QuadratureError("node budget exhausted")

    monkeypatch.setattr(cli, "odd_moment_coefficient_1d", explode)
    assert main(["moments", "--model", "coinless1d", "--alpha", "1.0"]) == 3
