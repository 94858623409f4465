import numpy as np
import pytest

from mac_sav_zec import ops
from mac_sav_zec.diagnostics import random_solenoidal
from mac_sav_zec.grid import GridSpec
from mac_sav_zec.scheme import Params
from mac_sav_zec.studies import (
    RateReport,
    convergence_space,
    convergence_time,
    observed_orders,
    read_rates_csv,
    restrict_cell,
    restrict_mac,
)


def test_observed_orders():
    assert observed_orders([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])


def test_restrict_constant_is_exact():
    np.testing.assert_array_equal(restrict_cell(np.full((8, 8), 3.0)), np.full((4, 4), 3.0))


def test_restrict_cell_preserves_mean(rng):
    f = rng.standard_normal((8, 8))
    assert restrict_cell(f).mean() == pytest.approx(f.mean())


def test_restrict_mac_keeps_divergence_free(rng):
    u = random_solenoidal(GridSpec(16), rng)
    c = restrict_mac(u)
    assert c.x.shape == (8, 9)
    assert ops.norm_inf(ops.div_mac(c)) < 1e-12 * u.max_abs() * 16


def test_restrict_mac_second_order():
    errs = []
    for n in (8, 16, 32):
        fine, coarse = GridSpec(2 * n), GridSpec(n)
        f = lambda x, y: np.sin(np.pi * x) * np.cos(np.pi * y)
        v = fine.zeros_mac()
        v.x[:] = fine.sample(f, 1)
        errs.append(np.max(np.abs(restrict_mac(v).x - coarse.sample(f, 1))))
    assert np.all(np.diff(np.log2(errs)) < -1.8)


def test_rates_csv_round_trip(tmp_path):
    rep = RateReport("u_l2", [(0.01, 4e-3), (0.005, 1e-3), (0.0025, 2.6e-4)], observed_orders([4e-3, 1e-3, 2.6e-4]))
    rep.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "level,resolution,error,order"
    assert lines[1].endswith(",")
    back = read_rates_csv(tmp_path / "r.csv")
    assert back.levels == rep.levels and back.observed_orders == rep.observed_orders


def test_small_time_study_shape():
    reps = convergence_time(Params(0.1, 1.0, 1.0, 1e-2, 8, 0.04), levels=3)
    assert set(reps) == {"phi_h1", "u_l2"}
    for rep in reps.values():
        assert len(rep.levels) == 3 and len(rep.observed_orders) == 2
        assert [r for r, _ in rep.levels] == [1e-2, 5e-3, 2.5e-3]


def test_small_space_study_shape():
    reps = convergence_space(Params(0.1, 1.0, 1.0, 1e-3, 4, 0.005), levels=3)
    assert [r for r, _ in reps["phi_h1"].levels] == [4, 8, 16]
    assert len(reps["u_l2"].observed_orders) == 2


def test_levels_and_reference_validation():
    base = Params(0.1, 1.0, 1.0, 1e-2, 8, 0.04)
    with pytest.raises(ValueError):
        convergence_time(base, levels=2)
    with pytest.raises(ValueError):
        convergence_time(base, levels=3, reference="exact")


def test_amplitude_scaling_keeps_orders():
    # errors scale with the data while the observed orders barely move
    base = Params(0.1, 1.0, 1.0, 4e-3, 32, 0.08)
    from mac_sav_zec.scheme import default_initial_phase

    small = convergence_time(base, 3, init=lambda g: 0.5 * default_initial_phase(g))
    big = convergence_time(base, 3, init=lambda g: default_initial_phase(g))
    for var in ("phi_h1", "u_l2"):
        ratio = big[var].levels[0][1] / small[var].levels[0][1]
        assert ratio > 1.5
        assert np.max(np.abs(np.subtract(big[var].observed_orders, small[var].observed_orders))) < 0.1
