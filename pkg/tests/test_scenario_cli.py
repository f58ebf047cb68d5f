import json
from pathlib import Path

import numpy as np
import pytest

from nlham.cli import fmt, main
from nlham.scenario import DEFAULT_TOLERANCES, ScenarioError, parse_scenario, scenario_from_dict

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "scenarios"
GOLDEN = Path(__file__).parent / "golden"


def base_doc():
    return {
        "media": {"resonances": [{"wp": 1.0, "wr": 2.0, "gamma": 0.3}]},
        "atom": {"levels": 2, "bare_freqs": [0.0, 1.0], "gamma": [[0, 0.1], [0.1, 0]],
                 "dipole": [[[0] * 6, [1, 0, 0, 0, 0, 0]], [[1, 0, 0, 0, 0, 0], [0] * 6]]},
    }


def test_minimal_vacuum_scenario_defaults():
    sc = parse_scenario(SCEN / "vacuum_minimal.toml")
    assert sc.media.is_vacuum
    assert sc.atom.n_levels == 2
    assert sc.tolerances == DEFAULT_TOLERANCES
    assert sc.cavity is None and sc.grids.modes is None
    assert len(sc.sha256) == 64


def test_lossy_scenario():
    sc = parse_scenario(SCEN / "lossy_host.toml")
    assert sc.atom.n_levels == 3
    assert sc.atom.dipoles[0, 1, 0] == 1.0 + 0.2j
    assert len(sc.grids.modes.modes) == 6


def test_negative_gamma_key_path():
    doc = base_doc()
    doc["media"]["resonances"][0]["gamma"] = -0.1
    with pytest.raises(ScenarioError) as e:
        scenario_from_dict(doc)
    assert e.value.key_path == "media.resonances[0].gamma"


def test_non_hermitian_dipole_names_pair():
    doc = base_doc()
    doc["atom"]["dipole"][1][0] = [1, 0.5, 0, 0, 0, 0]
    with pytest.raises(ScenarioError) as e:
        scenario_from_dict(doc)
    assert e.value.key_path == "atom.dipole[0][1]"


def test_unknown_tolerance():
    doc = base_doc()
    doc["tolerances"] = {"nonsense": 1.0}
    with pytest.raises(ScenarioError, match="tolerances.nonsense"):
        scenario_from_dict(doc)


def test_parse_error_has_position(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[media]\nresonances = [\n\n[atom\n")
    with pytest.raises(ScenarioError, match=r"line \d+, column \d+"):
        parse_scenario(p)


def test_float_format():
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert fmt(np.float64(-2.5)) == "-2.5000000000000000e+00"
    assert fmt(3) == "3" and fmt(True) == "true"


def run_cli(args, out):
    return main([*args, "--out", str(out)])


@pytest.mark.parametrize("cmd", ["chi2", "k-tensor", "channels", "rwa-derive", "mie", "green-check"])
def test_outputs_are_deterministic(cmd, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    s = str(SCEN / "lossy_host.toml")
    ra = run_cli([cmd, "--scenario", s], a)
    rb = run_cli([cmd, "--scenario", s], b)
    assert ra == rb
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        data = (a / name).read_bytes()
        assert data == (b / name).read_bytes()
        assert b"\r" not in data


def test_rwa_derive_golden(tmp_path):
    assert run_cli(["rwa-derive", "--scenario", str(SCEN / "vacuum_minimal.toml")], tmp_path) == 0
    assert (tmp_path / "rwa_derive.txt").read_bytes() == (GOLDEN / "rwa_derive.txt").read_bytes()
    meta = json.loads((tmp_path / "rwa_derive.meta.json").read_text())
    assert meta["pass"] is True and meta["seed"] == 42


def test_csv_schema(tmp_path):
    run_cli(["mie", "--scenario", str(SCEN / "lossy_host.toml")], tmp_path)
    header = (tmp_path / "mie.csv").read_text().splitlines()[0].split(",")
    assert header[:6] == ["z0", "ReC_exact", "ImC_exact", "ReC_series", "ImC_series", "rel_err"]


def test_exit_status_follows_checks(tmp_path):
    s = str(SCEN / "lossy_host.toml")
    assert run_cli(["k-tensor", "--scenario", s], tmp_path / "ok") == 0
    assert run_cli(["k-tensor", "--scenario", s, "--tol", "k_two_route=1e-30"], tmp_path / "bad") == 1
    meta = json.loads((tmp_path / "bad" / "k_tensor.meta.json").read_text())
    assert meta["pass"] is False and meta["tolerances"]["k_two_route"] == 1e-30


def test_seed_changes_random_cases(tmp_path):
    s = str(SCEN / "lossy_host.toml")
    run_cli(["k-tensor", "--scenario", s], tmp_path / "a")
    run_cli(["k-tensor", "--scenario", s, "--seed", "7"], tmp_path / "b")
    assert (tmp_path / "a" / "k_tensor.csv").read_bytes() != (tmp_path / "b" / "k_tensor.csv").read_bytes()


def test_error_record(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[media]\nresonances = [{ wp = 1.0, wr = 2.0, gamma = -0.3 }]\n'
                   '[atom]\nlevels = 2\nbare_freqs = [0.0, 1.0]\ngamma = [[0, 0.1], [0.1, 0]]\n'
                   'dipole = [[[0,0,0,0,0,0],[1,0,0,0,0,0]],[[1,0,0,0,0,0],[0,0,0,0,0,0]]]\n')
    assert run_cli(["chi2", "--scenario", str(bad)], tmp_path / "out") == 2
    rec = json.loads((tmp_path / "out" / "error.json").read_text())
    assert rec["key_path"] == "media.resonances[0].gamma"
    assert json.loads(capsys.readouterr().err) == rec


def test_unknown_tol_override(tmp_path):
    assert run_cli(["chi2", "--scenario", str(SCEN / "lossy_host.toml"), "--tol", "bogus=1"], tmp_path) == 2
    assert json.loads((tmp_path / "error.json").read_text())["key_path"] == "tolerances.bogus"


def test_vacuum_scenario_chi2_table(tmp_path):
    # the two-level parity atom has no second-order response at all
    assert run_cli(["chi2", "--scenario", str(SCEN / "vacuum_minimal.toml")], tmp_path) == 0
    rows = [r.split(",") for r in (tmp_path / "chi2.csv").read_text().splitlines()[1:]]
    assert len(rows) == 6 * 27
    assert all(float(x) == 0.0 for r in rows for x in r[5:])
