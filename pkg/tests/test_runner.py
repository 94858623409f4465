import json

import numpy as np
import pytest

from mac_sav_zec.config import parse_config
from mac_sav_zec.diagnostics import read_diag_csv
from mac_sav_zec.runner import Monitor, checked_integrate, initial_state, run
from mac_sav_zec.scheme import Params, SchemeInvariantError, default_initial_phase, init_state
from mac_sav_zec.snapshot import load_checkpoint, save_field


def config(tmp_path, body=""):
    text = ("epsilon = 0.1\nnu = 1\nlambda = 1\ntau = 1e-2\nn_cells = 16\nt_end = 0.1\n"
            f"output_dir = {tmp_path}\n" + body)
    return parse_config(text)


def test_equilibrium_run_constant_energy(tmp_path):
    res = run(config(tmp_path, "init_case = equilibrium\n"))
    assert res.exit_status == 0
    rows = read_diag_csv(tmp_path / "diag.csv")
    assert len(rows) == 11
    assert {r.energy_modified for r in rows} == {1.5}
    assert (tmp_path / "violations.jsonl").read_text() == ""


def test_smooth_run_energy_monotone(tmp_path):
    res = run(config(tmp_path, "snapshot_every = 4\n"))
    assert res.exit_status == 0
    e = [r.energy_modified for r in read_diag_csv(tmp_path / "diag.csv")]
    assert np.all(np.diff(e) <= 1e-10 * (1 + e[0]))
    assert sorted(p.name for p in tmp_path.glob("snap_*.macf")) == ["snap_4.macf", "snap_8.macf"]
    assert load_checkpoint(tmp_path / "snap_8.macf").step == 8


def test_zero_step_horizon(tmp_path):
    cfg = parse_config("epsilon = 0.1\nnu = 1\nlambda = 1\ntau = 1\nn_cells = 8\nt_end = 0.5\n"
                       f"output_dir = {tmp_path}\n")
    res = run(cfg)
    assert res.exit_status == 0
    assert len(read_diag_csv(tmp_path / "diag.csv")) == 1


def test_diag_every(tmp_path):
    run(config(tmp_path, "diag_every = 3\n"))
    steps = [r.step for r in read_diag_csv(tmp_path / "diag.csv")]
    assert steps == [0, 3, 6, 9, 10]


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(config(a, "init_case = random(4)\n"))
    run(config(b, "init_case = random(4)\n"))
    assert (a / "diag.csv").read_bytes() == (b / "diag.csv").read_bytes()


def test_violation_records_and_exit_status(tmp_path, monkeypatch):
    from mac_sav_zec import runner

    real = runner.step_detailed

    def leaky(state, params, order=2):
        new, rec = real(state, params, order)
        new.phi_n = new.phi_n + 1e-9
        return new, rec

    monkeypatch.setattr(runner, "step_detailed", leaky)
    res = run(config(tmp_path))
    assert res.exit_status == 1
    lines = (tmp_path / "violations.jsonl").read_text().splitlines()
    rec = json.loads(lines[0])
    assert set(rec) == {"step", "kind", "value", "tolerance"}
    assert rec["kind"] == "mass_drift" and rec["step"] == 1


def test_nan_stops_run(tmp_path, monkeypatch):
    from mac_sav_zec import runner

    real = runner.step_detailed

    def poison(state, params, order=2):
        new, rec = real(state, params, order)
        if new.step == 3:
            new.phi_n = new.phi_n * np.nan
        return new, rec

    monkeypatch.setattr(runner, "step_detailed", poison)
    res = run(config(tmp_path))
    assert res.exit_status == 1 and res.violations[-1].kind == "nan"
    assert res.final_state.step == 3


def test_from_snapshot(tmp_path):
    phi = default_initial_phase(Params(0.1, 1, 1, 1e-2, 16, 0.1).grid) * 2
    save_field(tmp_path / "phi.macf", phi)
    cfg = config(tmp_path, f"init_case = from_snapshot({tmp_path / 'phi.macf'})\n")
    np.testing.assert_array_equal(initial_state(cfg).phi_n, phi)


def test_restart_from_checkpoint(tmp_path):
    run(config(tmp_path / "a", "snapshot_every = 5\n"))
    snap = tmp_path / "a" / "snap_5.macf"
    state = initial_state(config(tmp_path / "b", f"init_case = from_snapshot({snap})\n"))
    assert state.step == 5 and state.time == pytest.approx(0.05)


def test_snapshot_grid_mismatch(tmp_path):
    save_field(tmp_path / "phi.macf", np.zeros((8, 8)))
    cfg = config(tmp_path, f"init_case = from_snapshot({tmp_path / 'phi.macf'})\n")
    with pytest.raises(ValueError, match="does not match"):
        initial_state(cfg)


def test_checked_integrate_and_monitor():
    p = Params(0.1, 1.0, 1.0, 1e-2, 8, 0.05)
    s = init_state(default_initial_phase(p.grid))
    out = checked_integrate(s, p)
    assert out.step == 5
    m = Monitor(out, p)
    out.u_n.x[2, 3] += 1.0
    kinds = {v.kind for v in m.check(out)}
    assert "divergence" in kinds
    with pytest.raises(SchemeInvariantError):
        bad = init_state(default_initial_phase(p.grid))
        bad.phi_nm1 = bad.phi_nm1 + 1.0  # inconsistent history breaks mass
        checked_integrate(bad, p, n_steps=1)
