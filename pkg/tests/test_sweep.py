"""Sweep harness: variant generation, parallel consistency, ranking.

The jobs=1 vs jobs=2 comparison asserts exact equality of every physics
metric; only wall-clock columns may differ between runs.
"""
import numpy as np
import pytest

from stentlab.errors import ValidationError
from stentlab.geometry import scale_strut_width
from stentlab.sweep import (METRIC_COLUMNS, SweepResult, rank_designs,
                            run_sweep, sweep_rows, width_variants)
from conftest import make_tiny_design, make_tiny_scenario

TIME_COLUMNS = tuple(c for c in METRIC_COLUMNS if c.startswith("t_"))
PHYSICS_COLUMNS = tuple(c for c in METRIC_COLUMNS if not c.startswith("t_"))


def test_width_variants_names_and_scaling():
    base = make_tiny_design()
    control, plus, minus = width_variants(base)
    assert control is base
    assert plus.name == "tiny-20I"
    assert minus.name == "tiny-20D"
    assert abs(plus.strut_width - 0.30) < 1e-12
    assert abs(minus.strut_width - 0.20) < 1e-12
    five = width_variants(base, deltas=(0.2, 0.1))
    assert [d.name for d in five] == ["tiny", "tiny-20I", "tiny-20D",
                                      "tiny-10I", "tiny-10D"]


def test_scale_strut_width_rejects_nonpositive():
    with pytest.raises(ValidationError):
        scale_strut_width(make_tiny_design(), 0.0)
    with pytest.raises(ValidationError):
        scale_strut_width(make_tiny_design(), -1.2)


def test_run_sweep_input_validation():
    scenario = make_tiny_scenario()
    with pytest.raises(ValidationError):
        run_sweep([], scenario)
    twin = [make_tiny_design(), make_tiny_design()]
    with pytest.raises(ValidationError):
        run_sweep(twin, scenario)


def test_sweep_parallelism_does_not_change_results(tiny_sweep_pair):
    serial, parallel, _ = tiny_sweep_pair
    assert len(serial) == len(parallel) == 3
    for a, b in zip(serial, parallel):
        assert a.design_name == b.design_name
        assert a.strut_width_mm == b.strut_width_mm
        assert a.status == b.status == "ok"
        for col in PHYSICS_COLUMNS:
            # region columns not present on this design stay absent in both
            assert a.metrics.get(col) == b.metrics.get(col), col


def test_sweep_results_follow_input_order(tiny_sweep_pair):
    serial, _, _ = tiny_sweep_pair
    assert [r.design_name for r in serial] == ["tiny", "tiny-20I", "tiny-20D"]
    for r in serial:
        assert r.ok
        assert r.metrics["n_points"] > 0


def test_sweep_captures_errors_per_design():
    # a sheath wider than the frame fails validation inside the run
    scenario = make_tiny_scenario()
    from dataclasses import replace
    bad = replace(scenario, sheath=replace(scenario.sheath,
                                           target_diameter=12.0))
    results = run_sweep(width_variants(bad.design), bad, jobs=1)
    assert len(results) == 3
    for r in results:
        assert not r.ok
        assert r.status.startswith("error: ")
        assert r.metrics == {}


def test_rank_designs_orders_and_tie_breaks():
    mk = lambda name, frac: SweepResult(name, 0.3, "ok",
                                        {"failed_fraction": frac})
    bad = SweepResult("broken", 0.3, "error: boom", {})
    ranked = rank_designs([mk("b", 0.2), bad, mk("a", 0.2), mk("c", 0.1)])
    assert [r.design_name for r in ranked] == ["c", "a", "b", "broken"]


def test_rank_designs_missing_key_raises():
    with pytest.raises(ValidationError):
        rank_designs([SweepResult("x", 0.3, "ok", {})], key="failed_fraction")


def test_sweep_rows_cover_metric_columns(tiny_sweep_pair):
    serial, _, _ = tiny_sweep_pair
    header, rows = sweep_rows(serial)
    assert header[:3] == ["design_name [-]", "strut_width [mm]", "status [-]"]
    assert len(header) == 3 + len(METRIC_COLUMNS)
    assert len(rows) == 3
    for row in rows:
        assert len(row) == len(header)
    # a failed run leaves blank metric cells instead of crashing
    _, bad_rows = sweep_rows([SweepResult("x", 0.1, "error: nope", {})])
    assert bad_rows[0][3:] == [""] * len(METRIC_COLUMNS)
