import csv
import io
import json

import numpy as np
import pytest

from bifree.cli import dumps_measure, levy_to_dict, load_measure, main, measure_from_dict
from bifree.limits import normal_levy
from bifree.measure import AtomicMeasure2D, MeasureError

MU = AtomicMeasure2D.from_angles([0.3, -0.5, 0.9], [0.2, 0.4, -0.7], [0.5, 0.3, 0.2])
NU = AtomicMeasure2D.from_angles([-0.2, 0.6], [0.8, 0.1], [0.6, 0.4])


@pytest.fixture
def files(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(dumps_measure(MU))
    b.write_text(dumps_measure(NU))
    return tmp_path, a, b


def test_measure_json_round_trip(files):
    tmp, a, _ = files
    back = load_measure(a)
    assert np.allclose(back.s_angles, MU.s_angles) and np.allclose(back.weights, MU.weights)
    again = tmp / "again.json"
    again.write_text(dumps_measure(back))
    assert again.read_bytes() == a.read_bytes()


def test_bad_atom_reports_index():
    with pytest.raises(MeasureError, match="atom index 1"):
        measure_from_dict({"atoms": [{"s_angle": 0, "t_angle": 0, "weight": 0.5},
                                     {"s_angle": 0, "weight": 0.5}]})


def test_convolve_writes_full_table(files, capsys):
    tmp, a, b = files
    out = tmp / "table.csv"
    assert main(["convolve", str(a), str(b), "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["p", "q", "re", "im"]
    assert len(rows) == 1 + 13 * 13
    assert (tmp / "table.diagnostics.json").exists()


def test_convolve_is_deterministic(files):
    tmp, a, b = files
    outs = []
    for name in ("x.csv", "y.csv"):
        assert main(["convolve", str(a), str(b), "--order", "3", "--out", str(tmp / name)]) == 0
        outs.append((tmp / name).read_bytes())
    assert outs[0] == outs[1]


def test_json_output_has_diagnostics(files, capsys):
    _, a, _ = files
    assert main(["power", str(a), "--n", "2", "--order", "2", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["order"] == 2
    assert "quadrant_mismatch" in data["diagnostics"]


def test_transform_point_evaluation(files, capsys):
    _, a, _ = files
    assert main(["transform", "--measure", str(a), "--which", "psi", "--at", "0.1,0", "0,0.2"]) == 0
    rec = json.loads(capsys.readouterr().out)[0]
    assert rec["component"] == "DD"


def test_torus_point_is_domain_error(files, capsys):
    _, a, _ = files
    assert main(["transform", "--measure", str(a), "--at", "1,0", "0.1,0"]) == 1
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "domain"


def test_missing_file_is_io_error(tmp_path, capsys):
    assert main(["convolve", str(tmp_path / "nope.json"), str(tmp_path / "nope.json")]) == 2


def test_invalid_measure_is_domain_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"atoms": [{"s_angle": 0, "t_angle": 0, "weight": 0.4}]}))
    assert main(["power", str(bad), "--n", "2"]) == 1


def test_idlaw_command(tmp_path):
    path = tmp_path / "levy.json"
    path.write_text(json.dumps(levy_to_dict(normal_levy(0.5))))
    out = tmp_path / "n.csv"
    assert main(["idlaw", str(path), "--order", "2", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 5 * 5


def test_limit_demo_with_figure(tmp_path):
    fig = tmp_path / "sweep.png"
    out = tmp_path / "sweep.csv"
    assert main(["limit-demo", "--levels", "8,16", "--order", "2", "--out", str(out), "--figure", str(fig)]) == 0
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(out.read_text().splitlines()) == 3


def test_haar_check_command(tmp_path, capsys):
    spec = tmp_path / "haar.json"
    spec.write_text(json.dumps({"measure": json.loads(dumps_measure(MU)), "k": [1, 2, 4], "pipeline_max": 4}))
    assert main(["haar-check", str(spec)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert len(data["levels"]) == 3
