import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagwave.cli import EXIT_CONFIG, EXIT_OK, main
from lagwave.euler_riemann import GasParams
from lagwave.scenario import (
    ConfigError,
    DielectricBoundError,
    GridSpec,
    composite_scenario,
    contact_scenario,
    content_hash,
    maxwell_scenario,
    parse_config,
    scenario_from_dict,
    scenario_to_dict,
    write_config,
)
from lagwave.solver import SolverConfig


def minimal_contact(**end_states):
    es = {"theta_minus": 1.0, "theta_plus": 1.1, "p_plus": 1.0}
    es.update(end_states)
    return {"kind": "contact", "name": "c", "end_states": es}


# -- config parsing --------------------------------------------------------------

def test_minimal_contact_config_fills_defaults():
    sc = scenario_from_dict(minimal_contact())
    assert sc.left.v == 1.0 and sc.right.v == pytest.approx(1.1)
    assert sc.left.u == sc.right.u == 0.0
    assert sc.params == GasParams()
    assert sc.grid == GridSpec()
    assert sc.solver.relaxation == "exact-exponential"
    assert math.isinf(sc.dielectric_bound())


def test_epsilon_above_bound_rejected_citing_one_64th():
    d = minimal_contact(theta_plus=1.0, u_minus=1.0)
    d["params"] = {"epsilon": 1.0}
    with pytest.raises(DielectricBoundError, match="0.015625") as info:
        scenario_from_dict(d)
    assert info.value.path == "params.epsilon"
    assert info.value.bound == 1.0 / 64.0


def test_override_allows_epsilon_above_bound():
    d = minimal_contact(theta_plus=1.0, u_minus=1.0)
    d["params"] = {"epsilon": 1.0}
    d["override_dielectric_bound"] = True
    assert scenario_from_dict(d).params.epsilon == 1.0


@pytest.mark.parametrize("path, patch", [
    ("params.mu", {"params": {"mu": "fast"}}),
    ("grid.n", {"grid": {"n": 100.5}}),
    ("solver.t_end", {"solver": {"t_end": None}}),
    ("end_states.theta_plus", {"end_states": {"theta_minus": 1.0, "theta_plus": "hot", "p_plus": 1.0}}),
])
def test_malformed_numeric_field_named(path, patch):
    d = {**minimal_contact(), **patch}
    with pytest.raises(ConfigError) as info:
        scenario_from_dict(d)
    assert info.value.path == path


def test_unknown_field_and_kind_rejected():
    with pytest.raises(ConfigError, match="unknown field"):
        scenario_from_dict({**minimal_contact(), "colour": "blue"})
    with pytest.raises(ConfigError) as info:
        scenario_from_dict({**minimal_contact(), "kind": "shock"})
    assert info.value.path == "kind"


def test_builtin_scenarios_round_trip(tmp_path):
    for sc in (contact_scenario(), composite_scenario(), maxwell_scenario()):
        path = tmp_path / f"{sc.name}.json"
        write_config(sc, path)
        assert parse_config(path) == sc
        assert content_hash(parse_config(path)) == content_hash(sc)


def test_shipped_configs_match_builtins():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    assert parse_config(root / "contact.json") == contact_scenario()
    assert parse_config(root / "composite.json") == composite_scenario()
    assert parse_config(root / "maxwell.json") == maxwell_scenario()


def test_contact_round_trip_keeps_given_pressure():
    # R theta / p_plus recomputed from the stored volume is off by one ulp here
    d = minimal_contact(theta_minus=1.0, theta_plus=1.5, p_plus=1.46875, u_minus=0.0)
    d["params"] = {"epsilon": 1e-4}
    sc = scenario_from_dict(d)
    assert scenario_from_dict(json.loads(json.dumps(scenario_to_dict(sc)))) == sc


@given(st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(-0.5, 0.5),
       st.integers(16, 5000), st.floats(0.1, 100.0))
def test_contact_config_round_trip_property(tm, tp, pp, um, n, t_end):
    d = minimal_contact(theta_minus=tm, theta_plus=tp, p_plus=pp, u_minus=um)
    d["grid"] = {"x_min": -10.0, "x_max": 10.0, "n": n}
    d["solver"] = {"t_end": t_end}
    d["params"] = {"epsilon": 1e-4}
    sc = scenario_from_dict(d)
    again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(sc))))
    assert again == sc


def test_composite_right_velocity_from_middle_pressure():
    sc = composite_scenario()
    from lagwave.euler_riemann import solve_intermediate_states

    assert solve_intermediate_states(sc.left, sc.right, sc.params).pm == pytest.approx(0.9, rel=1e-9)


# -- CLI ----------------------------------------------------------------------------

def small_maxwell(tmp_path, **kw):
    sc = replace(maxwell_scenario(), grid=GridSpec(-10.0, 10.0, 65),
                 solver=SolverConfig(t_end=0.2, output_stride=0.1, frozen_fluid=True), **kw)
    path = tmp_path / "m.json"
    write_config(sc, path)
    return path


def test_bounds_prints_one_64th(tmp_path, capsys):
    d = minimal_contact(theta_plus=1.0, u_minus=1.0)
    d["grid"] = {"x_min": -10.0, "x_max": 10.0, "n": 64}
    path = tmp_path / "b.json"
    path.write_text(json.dumps(d))
    assert main(["bounds", "--config", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "1/64" in out and "0.015625" in out


def test_config_errors_give_exit_code_two(tmp_path, capsys):
    d = minimal_contact(theta_plus=1.0, u_minus=1.0)
    d["params"] = {"epsilon": 1.0}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    assert main(["bounds", "--config", str(path)]) == EXIT_CONFIG
    assert "params.epsilon" in capsys.readouterr().err
    assert main(["bounds", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_override_flag_recorded_in_report(tmp_path):
    d = minimal_contact(theta_plus=1.0, u_minus=1.0)
    d["params"] = {"epsilon": 1.0}
    d["grid"] = {"x_min": -10.0, "x_max": 10.0, "n": 64}
    path = tmp_path / "o.json"
    path.write_text(json.dumps(d))
    out = tmp_path / "out"
    assert main(["profile", "--config", str(path), "--out", str(out), "--override-dielectric-bound",
                 "--no-figures"]) == EXIT_OK
    assert json.loads((out / "ledger.json").read_text())["override_used"] is True


def test_profile_with_zero_strength_has_constant_columns(tmp_path):
    d = minimal_contact(theta_plus=1.0)
    d["grid"] = {"x_min": -10.0, "x_max": 10.0, "n": 64}
    d["checkpoints"] = [1.0]
    d["solver"] = {"t_end": 2.0}
    path = tmp_path / "z.json"
    path.write_text(json.dumps(d))
    out = tmp_path / "out"
    assert main(["profile", "--config", str(path), "--out", str(out)]) == EXIT_OK
    files = sorted((out / "profiles").glob("background_t*.csv"))
    assert len(files) == 3
    for f in files:
        with open(f) as fh:
            rows = list(csv.DictReader(fh))
        for col in ("V", "U", "Theta", "Vx", "Ux", "Thetax"):
            assert len({r[col] for r in rows}) == 1
    assert (out / "figures" / "profile_t0.png").stat().st_size > 0


def test_simulate_writes_snapshots_and_ledger(tmp_path, capsys):
    path = small_maxwell(tmp_path)
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == EXIT_OK
    snaps = sorted((out / "snapshots").glob("*.csv"))
    assert len(snaps) == 3
    assert snaps[0].read_text().splitlines()[0] == "x,v,u,theta,E,b"
    data = np.loadtxt(snaps[-1], delimiter=",", skiprows=1)
    assert data.shape == (65, 6)
    report = json.loads((out / "ledger.json").read_text())
    assert report["schema_version"] == 1
    assert report["times"] == [0.0, 0.1, 0.2]
    assert {"norms", "identities", "fits", "checks", "input_hash", "dielectric_bound"} <= set(report)
    assert (out / "figures" / "ledger.png").exists()
    assert "PASS [8]" in capsys.readouterr().out


def test_simulate_is_bit_reproducible(tmp_path):
    path = small_maxwell(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--config", str(path), "--out", str(out), "--no-figures"]) == EXIT_OK
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert files
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_verify_maxwell_scenario(tmp_path, capsys):
    path = tmp_path / "mx.json"
    write_config(maxwell_scenario(), path)
    code = main(["verify", "--config", str(path), "--out", str(tmp_path / "v"), "--no-figures"])
    out = capsys.readouterr().out
    assert code == EXIT_OK, out
    assert "PASS [7]" in out and "PASS [8]" in out and "PASS [11]" in out


def test_threads_env_is_applied(tmp_path, monkeypatch):
    monkeypatch.setenv("LAGWAVE_THREADS", "1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    path = small_maxwell(tmp_path)
    main(["bounds", "--config", str(path)])
    import os

    assert os.environ["OMP_NUM_THREADS"] == "1"
