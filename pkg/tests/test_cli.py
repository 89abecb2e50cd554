import csv
import json

import numpy as np
import pytest

from orbitforge.cli import main, parse_config
from orbitforge.core import MassSystem, preset_configuration
from orbitforge.errors import BadParams, SchemaError
from orbitforge.orbitio import dumps, read_orbit, write_orbit
from orbitforge.paths import NodePath, relative_equilibrium_loop

from conftest import smooth_loop

EIGHT_CONFIG = {"n": 3, "period": 12, "symmetry": "d6_eight", "amplitude": 1.5, "seeds": [0, 1]}


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def solved_eight(tmp_path_factory):
    d = tmp_path_factory.mktemp("eight")
    cfg = write_json(d / "eight.json", EIGHT_CONFIG)
    out = d / "orbit.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    return d, cfg, out


def test_solve_writes_orbit_and_report(solved_eight):
    d, _, out = solved_eight
    rep = json.loads((d / "orbit.report.json").read_text())
    assert rep["converged"]
    assert rep["best"]["action"] < rep["eight_bound"]
    loop, meta = read_orbit(out)
    assert loop.modes == 24
    assert meta["symmetry"] == {"name": "d6_eight", "n": 3}
    assert meta["provenance"]["seeds"] == [0, 1]


def test_solve_is_deterministic(solved_eight, tmp_path):
    d, cfg, out = solved_eight
    again = tmp_path / "again.json"
    assert main(["solve", "--config", cfg, "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_verify_fresh_eight(solved_eight, capsys):
    _, _, out = solved_eight
    capsys.readouterr()
    assert main(["verify", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"]
    assert set(rep["metrics"]) >= {"closure_error", "energy_drift", "lagrange_jacobi_max",
                                   "invariance_defect", "min_distance"}


def test_verify_corrupted_orbit(solved_eight, tmp_path, capsys):
    _, _, out = solved_eight
    doc = json.loads(out.read_text())
    c = np.array(doc["coefficients"])
    c[0, :, 3] += 0.3
    doc["coefficients"] = c.tolist()
    bad = write_json(tmp_path / "bad.json", doc)
    assert main(["verify", bad]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert not rep["checks"]["closure_error"]


def test_verify_relative_equilibrium(tmp_path, capsys):
    ms = MassSystem.equal(3, 3)
    loop = relative_equilibrium_loop(preset_configuration("equilateral", ms), ms, 2 * np.pi)
    path = tmp_path / "re.json"
    write_orbit(path, loop)
    assert main(["verify", str(path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["metrics"]["closure_error"] < 1e-6


def test_verify_thresholds_from_config(solved_eight, tmp_path):
    _, _, out = solved_eight
    strict = write_json(tmp_path / "t.json", {"thresholds": {"closure_error": 1e-12}})
    assert main(["verify", str(out), "--config", strict]) == 1


def test_verify_schema_mismatch(solved_eight, tmp_path):
    _, _, out = solved_eight
    doc = json.loads(out.read_text())
    doc["version"] = 99
    bad = write_json(tmp_path / "v99.json", doc)
    assert main(["verify", bad]) == 2
    with pytest.raises(SchemaError):
        read_orbit(bad)


def test_orbit_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(9)
    loop = smooth_loop(rng, modes=7)
    write_orbit(tmp_path / "a.json", loop, provenance={"seed": 3})
    back, meta = read_orbit(tmp_path / "a.json")
    assert np.array_equal(back.coeffs, loop.coeffs)
    assert back.period == loop.period and back.ms == loop.ms
    assert meta["provenance"]["seed"] == 3
    xa = np.array([[-1.0, 0.1], [1.0, -0.1]])
    p = NodePath.straight(MassSystem((1.0, 2.0), 2), xa, 2 * xa, 0.7, 5, t0=0.2)
    write_orbit(tmp_path / "b.json", p)
    q, _ = read_orbit(tmp_path / "b.json")
    assert np.array_equal(q.all_nodes, p.all_nodes) and q.t0 == p.t0 and q.duration == p.duration
    assert dumps(q) == dumps(p)


def test_symmetry_preset_for_wrong_body_count():
    text = '{\n "n": 3,\n "period": 12,\n "symmetry": {"name": "choreography", "n": 4}\n}'
    with pytest.raises(BadParams, match=r"cfg:4: field 'symmetry'"):
        parse_config(text, "cfg")
    with pytest.raises(BadParams, match="symmetry"):
        parse_config('{"n": 4, "period": 1, "symmetry": "d6_eight"}')


@pytest.mark.parametrize("text,field", [
    ('{"n": 3}', "period"),
    ('{"n": 3, "period": -1}', "period"),
    ('{"n": 3, "period": 1, "modes": 24, "samples": 32}', "samples"),
    ('{"n": 3, "period": 1, "masses": [1, 1]}', "n"),
    ('{"n": 3, "period": 1, "colour": "red"}', "colour"),
    ('{"n": 3, "period": 1, "options": {"gtol": 0}}', "options"),
    ('{"problem": "p12", "period": 12, "u": 2.0}', "u"),
    ('{"problem": "fixed_ends", "x_initial": [[0, 0], [1, 0]], "x_final": [[0, 0]], "duration": 1}', "x_final"),
])
def test_config_field_errors(text, field):
    with pytest.raises(BadParams, match=f"field '{field}'"):
        parse_config(text)


def test_config_syntax_error_has_line(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{\n "n": 3,\n "period": 12,\n}\n')
    assert main(["solve", "--config", str(p)]) == 2
    assert "broken.json:4" in capsys.readouterr().err


def test_solve_fixed_ends_and_action_eval(tmp_path, capsys):
    cfg = write_json(tmp_path / "fe.json", {
        "problem": "fixed_ends", "x_initial": [[-0.5, 0.0], [0.5, 0.0]],
        "x_final": [[0.0, -0.5], [0.0, 0.5]], "duration": 0.5 * np.pi / np.sqrt(2), "nodes": 128})
    out = tmp_path / "arc.json"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["action-eval", str(out)]) == 0
    a = json.loads(capsys.readouterr().out)["action"]
    assert a == pytest.approx(1.5 * 0.5 * np.pi / np.sqrt(2), rel=1e-4)
    assert main(["verify", str(out)]) == 0


def test_solve_p12(tmp_path):
    cfg = write_json(tmp_path / "p.json", {"problem": "p12", "period": 12, "u": 0.3})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "p12.json")]) == 0
    path, meta = read_orbit(tmp_path / "p12.json")
    assert meta["symmetry"]["name"] == "p12" and path.duration == 1.0


def test_solve_flag_overrides(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"n": 2, "dim": 2, "period": 6.283185307179586,
                                           "symmetry": "choreography", "seeds": [0, 1, 2]})
    out = tmp_path / "o.json"
    assert main(["solve", "--config", cfg, "--modes", "6", "--samples", "32", "--seed", "4",
                 "--out", str(out)]) == 0
    loop, meta = read_orbit(out)
    assert loop.modes == 6 and meta["provenance"]["seeds"] == [4]


def test_sweep_p12(tmp_path):
    out = tmp_path / "sweep.csv"
    us = [0.0, 0.2, np.pi / 6]
    assert main(["sweep-p12", "--u", ",".join(repr(u) for u in us), "--out", str(out)]) == 0
    rows = read_csv(out)
    header, body = rows[0], rows[1:]
    assert len(body) == 3
    for r in body:
        rec = dict(zip(header, r))
        assert float(rec["action"]) <= float(rec["bound"]) * (1 + 1e-6)
    signs = [int(dict(zip(header, r))["hessian_sign"]) for r in body]
    assert signs[0] == signs[1] == -1


def test_sweep_empty_grid(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["sweep-p12", "--u", "", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 1 and rows[0][0] == "u"


def test_sweep_outside_range(tmp_path):
    assert main(["sweep-p12", "--u", "0.9", "--out", str(tmp_path / "x.csv")]) == 2


def test_marchal_demo(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["marchal-demo", "--dim", "3", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["rho", "t0", "A", "A_m", "normalized"]
    assert len(rows) == 8
    assert float(rows[-1][4]) == pytest.approx(2.0, rel=0.1)
    assert main(["marchal-demo", "--dim", "2", "--rho", "0.01,0.005", "--out", str(out)]) == 0
    assert all(float(r[3]) < float(r[2]) for r in read_csv(out)[1:])
    assert main(["marchal-demo", "--dim", "4"]) == 2


def test_plot_eight(solved_eight, tmp_path):
    _, _, out = solved_eight
    stem = tmp_path / "eight"
    assert main(["plot", str(out), "--out", str(stem), "--samples", "300"]) == 0
    rows = read_csv(str(stem) + ".csv")
    assert rows[0] == ["t", "body", "x", "y", "z"]
    pts = np.array([[float(v) for v in r] for r in rows[1:]])
    by_body = [pts[pts[:, 1] == b][:, 2:] for b in range(3)]
    # choreography: body 1 at time t is body 0 at a shifted time, so the point sets coincide
    for b in (1, 2):
        d = np.linalg.norm(by_body[b][:, None] - by_body[0][None], axis=-1).min(axis=1)
        assert d.max() < 0.05
    svg = (tmp_path / "eight.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3


def test_plot_two_body_circle(tmp_path):
    ms = MassSystem.equal(2, 2)
    loop = relative_equilibrium_loop(np.array([[-1.0, 0.0], [1.0, 0.0]]), ms, 1.0)
    write_orbit(tmp_path / "c.json", loop)
    assert main(["plot", str(tmp_path / "c.json"), "--out", str(tmp_path / "c")]) == 0
    pts = np.array([[float(v) for v in r] for r in read_csv(tmp_path / "c.csv")[1:]])
    radii = [np.linalg.norm(pts[pts[:, 1] == b][:, 2:], axis=1) for b in (0, 1)]
    assert np.ptp(radii[0]) < 1e-12 and np.allclose(radii[0], radii[1])
    # opposite phase
    p0, p1 = pts[pts[:, 1] == 0][:, 2:], pts[pts[:, 1] == 1][:, 2:]
    assert np.allclose(p0, -p1)
