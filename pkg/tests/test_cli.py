import csv
import io
import json

import pytest
from numpy.testing import assert_allclose

from exclusion_bounds.cli import main, parse_grid
from exclusion_bounds.io import format_number, read_state, state_to_dict, write_csv
from exclusion_bounds.measurements import ensemble_to_dict
from exclusion_bounds.quantum import bell_state
from exclusion_bounds.scenarios import get_scenario, qubit_family, qutrit_three_measurements


@pytest.fixture
def files(tmp_path):
    state = tmp_path / "bell.json"
    state.write_text(json.dumps(state_to_dict(bell_state(2))))
    mub = tmp_path / "mub.json"
    mub.write_text(json.dumps(ensemble_to_dict(qubit_family(0.5))))
    three = tmp_path / "three.json"
    three.write_text(json.dumps(ensemble_to_dict(qutrit_three_measurements(0.5))))
    return tmp_path, state, mub, three


def test_bounds_bell(files, capsys):
    tmp, state, mub, _ = files
    out = tmp / "report.json"
    assert main(["bounds", "--state", str(state), "--ensemble", str(mub), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert_allclose(doc["lhs_info_sum"], 2.0, atol=1e-9)
    assert doc["violations"] == {}


def test_bounds_malformed(files, capsys):
    tmp, state, mub, _ = files
    doc = ensemble_to_dict(qubit_family(0.5))
    doc["bases"][0]["vectors"][1][0] = ["one", 0]
    bad = tmp / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["bounds", "--state", str(state), "--ensemble", str(bad)]) != 0
    assert "bases[0].vectors[1][0]" in capsys.readouterr().err


def test_bounds_inapplicable(files, capsys):
    _, state, mub, _ = files
    assert main(["bounds", "--state", str(state), "--ensemble", str(mub), "--bounds", "lemma2"]) != 0
    assert "not applicable" in capsys.readouterr().err


def test_bounds_dimension_mismatch(files, capsys):
    _, state, _, three = files
    assert main(["bounds", "--state", str(state), "--ensemble", str(three)]) != 0


def test_bounds_violation_exit(files, monkeypatch, capsys):
    import exclusion_bounds.cli as cli

    real = cli.full_report

    def broken(*args, **kw):
        rep = real(*args, **kw)
        rep.slack["thm1"] = -0.5
        return rep

    _, state, mub, _ = files
    monkeypatch.setattr(cli, "full_report", broken)
    assert main(["bounds", "--state", str(state), "--ensemble", str(mub)]) == 1
    assert json.loads(capsys.readouterr().out)["violations"] == {"thm1": 0.5}
    with pytest.raises(SystemExit):
        main(["bounds", "--state", str(state), "--ensemble", str(mub), "--tol", "-1"])


def test_sweep_preset_with_difference(tmp_path):
    out = tmp_path / "fig2.csv"
    assert main(["sweep", "--preset", "fig2", "--out", str(out)]) == 0
    text = out.read_text()
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["a", "r_H", "thm1", "r_H-thm1"]
    assert len(rows) == 52
    assert min(float(r[3]) for r in rows[1:]) >= -1e-9


def test_sweep_is_bit_stable(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--scenario", "qubit", "--grid", "a=0.5:1:6", "--bounds", "thm1,r_CP", "--diff", "r_CP:thm1"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "a,thm1,r_CP,r_CP-thm1"


def test_sweep_errors(capsys):
    assert main(["sweep", "--scenario", "qubit", "--bounds", "r_nope"]) != 0
    assert main(["sweep", "--scenario", "qubit"]) != 0
    assert main(["sweep", "--scenario", "qubit", "--grid", "b=1", "--bounds", "thm1"]) != 0
    with pytest.raises(SystemExit):
        main(["sweep", "--scenario", "qubit7", "--bounds", "thm1"])


def test_parse_grid():
    s = parse_grid("a=0:1:3,phi=0.5", get_scenario("qutrit-three"))
    assert s.values == [0.0, 0.5, 1.0]
    assert s.fixed["phi"] == 0.5
    assert parse_grid("a=0.7", get_scenario("qubit")).values == [0.7]


def test_verify_cli(capsys):
    assert main(["verify", "--trials", "4", "--seed", "2", "--dims", "2", "--dominance-samples", "20"]) == 0
    first = capsys.readouterr().out
    assert main(["verify", "--trials", "4", "--seed", "2", "--dims", "2", "--dominance-samples", "20"]) == 0
    assert capsys.readouterr().out == first
    assert first.strip().endswith("PASS")


def test_verify_fault_injection(capsys):
    code = main(["verify", "--trials", "2", "--dims", "2", "--dominance-samples", "50", "--omega-scale", "0.99"])
    assert code == 1
    assert "FAIL dominance" in capsys.readouterr().out


def test_verify_ensemble_file(files, capsys):
    _, _, mub, _ = files
    assert main(["verify", "--trials", "2", "--ensembles", f"{mub},qubit", "--dominance-samples", "5"]) == 0
    assert main(["verify", "--trials", "2", "--ensembles", "nowhere"]) == 2


def test_compare_cli(capsys):
    assert main(["compare", "--scenario", "qutrit-three", "--grid", "a=0:1:3", "--bounds", "U1,r_x,r_y"]) == 0
    out = capsys.readouterr().out
    table, wins = out.split("\n\n")
    header = table.splitlines()[0].split(",")
    assert header == ["a", "U1", "r_x", "r_y", "min_rx_ry", "min", "winner"]
    assert "r_x,3" in wins


def test_format_number():
    assert format_number(0.1 + 0.2) == "0.3"
    assert format_number(-0.0) == "0"
    assert format_number(1234567.0) == "1234567"
    buf = io.StringIO()
    write_csv(buf, ["x", "y"], [{"x": 1.0, "y": 2.5e-13}])
    assert buf.getvalue() == "x,y\n1,2.5e-13\n"


def test_state_round_trip(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(state_to_dict(bell_state(3))))
    assert_allclose(read_state(p).matrix, bell_state(3).matrix, atol=1e-15)
