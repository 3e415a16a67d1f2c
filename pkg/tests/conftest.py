"""Shared fixtures.

The protocol runs (crimp, deploy, cyclic loading, radial force ladders)
are expensive, so they execute once per session and every test that needs
them reads from the same result objects.  Wall times are captured here so
the acceptance suite can assert runtime budgets without re-running.
"""
import json
import time

import numpy as np
import pytest

from stentlab.geometry import StentDesign, build_stent, save_design
from stentlab.loading import LumenModel, MotionProfile, SheathBC
from stentlab.pipeline import ScenarioConfig, resolve_design, run_pipeline
from stentlab.scenarios import radial_force_curve
from stentlab.sweep import run_sweep, width_variants


def make_tiny_design():
    """A 4x1 frame small enough for sub-10s protocol runs."""
    return StentDesign(name="tiny", n_cells=4, n_rows=1,
                       ring_diameters=(10.0, 10.0), row_heights=(6.0,),
                       strut_width=0.25,
                       thickness_profile=((0.0, 1.0, 0.25),),
                       region_bands=(("annulus", 0.0, 1.0),))


def make_tiny_scenario(design=None):
    motion = MotionProfile(period=0.03, peak_time=0.01, a0=0.05, a2=0.02,
                           axial_variation=((-4.0, 1.0), (10.0, 1.0)))
    lumen = LumenModel(profile=((-4.0, 4.6), (10.0, 4.6)), penalty=200.0,
                       friction_mu=0.3, motion=motion)
    return ScenarioConfig(design=design or make_tiny_design(),
                          sheath=SheathBC(target_diameter=8.0, crimp_time=0.1),
                          lumen=lumen, implantation_depth=0.0, n_cycles=2,
                          samples_per_cycle=4, deploy_time=0.1,
                          elements_per_strut=2)


@pytest.fixture(scope="session")
def tiny_scenario_files(tmp_path_factory):
    """tiny design json + a matching scenario json, for CLI runs."""
    root = tmp_path_factory.mktemp("tiny_cfg")
    design_path = str(root / "tiny.json")
    save_design(make_tiny_design(), design_path)
    scenario = {
        "design": design_path,
        "sheath": {"target_diameter": 8.0, "crimp_time": 0.1},
        "motion": {"period": 0.03, "peak_time": 0.01, "a0": 0.05, "a2": 0.02,
                   "axial_variation": [[-4.0, 1.0], [10.0, 1.0]]},
        "lumen": {"profile": [[-4.0, 4.6], [10.0, 4.6]], "penalty": 200.0,
                  "friction_mu": 0.3},
        "implantation_depth": 0.0,
        "n_cycles": 2,
        "samples_per_cycle": 4,
        "deploy_time": 0.1,
        "elements_per_strut": 2,
    }
    scenario_path = str(root / "tiny_scenario.json")
    with open(scenario_path, "w") as fh:
        json.dump(scenario, fh, indent=2)
    return design_path, scenario_path


@pytest.fixture(scope="session")
def tiny_sweep_pair():
    """The tiny width sweep run serially and with two workers."""
    scenario = make_tiny_scenario()
    designs = width_variants(scenario.design)
    t0 = time.perf_counter()
    serial = run_sweep(designs, scenario, jobs=1)
    parallel = run_sweep(designs, scenario, jobs=2)
    return serial, parallel, time.perf_counter() - t0


@pytest.fixture(scope="session")
def demo_scenario():
    return ScenarioConfig(design=resolve_design("corevalve26-like"))


@pytest.fixture(scope="session")
def demo_pipeline(demo_scenario):
    """Full protocol on the shipped demo device (crimp, deploy, 3 cycles)."""
    return run_pipeline(demo_scenario)


@pytest.fixture(scope="session")
def demo_variants():
    """[control, +20% strut width, -20% strut width]."""
    return width_variants(resolve_design("corevalve26-like"))


@pytest.fixture(scope="session")
def variant_pipelines(demo_variants):
    """Full protocol on both width variants, with total wall time."""
    _, plus, minus = demo_variants
    t0 = time.perf_counter()
    out = {d.name: run_pipeline(ScenarioConfig(design=d))
           for d in (plus, minus)}
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def radial_curves(demo_scenario, demo_variants):
    """Radial force ladders (8 diameters, free envelope down to 21 mm)."""
    diameters = np.linspace(30.0, 21.0, 8)
    t0 = time.perf_counter()
    out = {}
    for design in demo_variants:
        frame = build_stent(design, elements_per_strut=4)
        out[design.name] = radial_force_curve(frame, demo_scenario.material,
                                              diameters, demo_scenario.solver)
    return out, diameters, time.perf_counter() - t0
