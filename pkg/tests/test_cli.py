import json
import math

import pytest

from ballrecon.cli import main
from ballrecon.report import RunReport, csv_text, emit_report, read_csv
from ballrecon.scenarios import SCENARIOS, RunContext, run_scenario
from ballrecon.scene import Scene, SceneError, load_scene, scene_from_dict


def test_scene_parsing_and_diagnostics(tmp_path):
    s = scene_from_dict({"seed": 3, "measure": {"atoms": [[[0, 0], 1.0], {"at": [1, 0], "weight": -2}]},
                         "schedules": {"delta": [0.1, 0.05]}, "premeasure": {"kind": "noisy", "C": 3}})
    assert s.seed == 3 and len(s.measure.atoms) == 2 and s.deltas == (0.1, 0.05)
    with pytest.raises(SceneError, match="seed"):
        scene_from_dict({})
    with pytest.raises(SceneError, match="schedules.delta"):
        scene_from_dict({"seed": 0, "schedules": {"delta": [0.1, 0.2]}})
    with pytest.raises(SceneError, match=r"measure.atoms\[0\]"):
        scene_from_dict({"seed": 0, "measure": {"atoms": [5]}})
    with pytest.raises(SceneError, match="unknown top-level"):
        scene_from_dict({"seed": 0, "colour": 1})
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "seed": 0,\n}\n')
    with pytest.raises(SceneError, match="line 3"):
        load_scene(bad)


def test_empty_report_is_header_only():
    assert csv_text(RunReport("x", ("a", "b"))) == "a,b\n"


def test_csv_round_trip_is_bit_exact(tmp_path):
    rep = RunReport("rt", ("name", "value"))
    vals = [0.1, 1 / 3, math.pi * 1e-17, 2.0**-1074, -0.0]
    for i, v in enumerate(vals):
        rep.add(f"row,{i}", v)
    emit_report(rep, tmp_path)
    header, rows = read_csv(tmp_path / "rt.csv")
    assert header == ["name", "value"]
    assert [float(r[1]) for r in rows] == vals and rows[0][0] == "row,0"
    assert b"\r" not in (tmp_path / "rt.csv").read_bytes()


def test_sandwich_schema():
    assert SCENARIOS and "sandwich" in SCENARIOS


def test_scenario_output_independent_of_threads():
    a = run_scenario("dirac-loss", Scene(seed=1), RunContext(threads=1))
    b = run_scenario("dirac-loss", Scene(seed=1), RunContext(threads=4))
    assert csv_text(a) == csv_text(b)


def test_unknown_scenario():
    with pytest.raises(SceneError):
        run_scenario("nope", Scene(seed=0))


def test_cli_exit_codes(tmp_path, monkeypatch):
    out = tmp_path / "out"
    assert main(["directional-probe", "--out", str(out)]) == 0
    doc = json.loads((out / "directional-probe.verdicts.json").read_text())
    assert doc["passed"] and all("==" in v["inequality"] for v in doc["verdicts"])
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["cover", "--scene", str(bad), "--out", str(out)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-scenario"])
    assert exc.value.code == 2
    # a verdict failure: an impossible expected value for the circle probe
    scene = tmp_path / "probe.json"
    scene.write_text(json.dumps({"seed": 0, "sets": {"expected_r2": 17, "circle_points": 72, "rays": [5]}}))
    assert main(["directional-probe", "--scene", str(scene), "--out", str(out)]) == 1


def test_cli_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("BALLRECON_OUT", str(tmp_path / "env"))
    monkeypatch.setenv("BALLRECON_THREADS", "2")
    assert main(["curve-loss"]) == 0
    assert (tmp_path / "env" / "curve-loss.csv").exists()
    monkeypatch.setenv("BALLRECON_THREADS", "two")
    assert main(["curve-loss"]) == 2


def test_cli_pack_cover_and_besicovitch(tmp_path):
    scene = tmp_path / "s.json"
    scene.write_text(json.dumps({
        "seed": 0,
        "measure": {"atoms": [[[0.2, 0.2], 1.0], [[0.7, 0.6], 0.5]]},
        "sets": {"open": {"kind": "box", "low": [0, 0], "high": [1, 1]},
                 "balls": [{"center": [0, 0], "radius": 1}, {"center": [3, 0], "radius": 1}]},
        "schedules": {"delta": [0.1, 0.05]},
    }))
    out = tmp_path / "o"
    assert main(["pack", "--scene", str(scene), "--out", str(out)]) == 0
    header, rows = read_csv(out / "pack.csv")
    assert header == ["delta", "eps", "value", "status", "n_balls", "runtime_ms"]
    assert [float(r[2]) for r in rows] == [1.5, 1.5]
    assert main(["cover", "--scene", str(scene), "--out", str(out)]) == 0
    assert read_csv(out / "cover.csv")[0] == ["delta", "value", "status", "n_balls"]
    assert main(["besicovitch", "--scene", str(scene), "--out", str(out)]) == 0
    assert [r[3] for r in read_csv(out / "besicovitch.csv")[1]] == ["0", "0"]
