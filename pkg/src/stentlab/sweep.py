"""Design sweep harness: run the same protocol over a family of designs.

Each design runs in its own process when jobs > 1; a failed run is
reported in its result row instead of aborting the sweep.  Result order
always follows input order regardless of worker scheduling.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .errors import StentLabError, ValidationError
from .geometry import StentDesign, scale_strut_width
from .pipeline import ScenarioConfig, run_pipeline

METRIC_COLUMNS = ("anchorage_N", "peak_compression_mm", "mean_eccentricity",
                  "peak_eccentricity", "radii_deviation_mm", "periodicity",
                  "n_points", "n_failed", "failed_fraction",
                  "failed_annulus", "failed_waist", "failed_crown",
                  "crimp_max_abs_strain", "t_total_s")


@dataclass
class SweepResult:
    design_name: str
    strut_width_mm: float
    status: str = "ok"            # "ok" or "error: <reason>"
    metrics: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "ok"


def width_variants(design: StentDesign, deltas=(0.2,)):
    """Control design plus widened/narrowed strut variants."""
    out = [design]
    for d in deltas:
        out.append(scale_strut_width(design, 1.0 + d))
        out.append(scale_strut_width(design, 1.0 - d))
    return out


def _run_one(args):
    design, scenario = args
    try:
        result = run_pipeline(replace(scenario, design=design))
        return SweepResult(design.name, design.strut_width, "ok",
                           result.metrics)
    except StentLabError as exc:
        return SweepResult(design.name, design.strut_width,
                           f"error: {exc}", {})


def run_sweep(designs, scenario: ScenarioConfig, jobs=1):
    """Run ``scenario`` once per design; returns results in input order."""
    designs = list(designs)
    if not designs:
        raise ValidationError("empty design list")
    names = [d.name for d in designs]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate design names in sweep: {names}")
    jobs = max(1, int(jobs))
    payload = [(d, scenario) for d in designs]
    if jobs == 1 or len(designs) == 1:
        return [_run_one(p) for p in payload]
    with ProcessPoolExecutor(max_workers=min(jobs, len(designs))) as pool:
        return list(pool.map(_run_one, payload))


def rank_designs(results, key="failed_fraction"):
    """Sort ok-results ascending by metric, name as tie break; failed runs
    go last in input order."""
    ok = [r for r in results if r.ok]
    bad = [r for r in results if not r.ok]
    for r in ok:
        if key not in r.metrics:
            raise ValidationError(f"metric {key!r} missing from {r.design_name}")
    ok.sort(key=lambda r: (r.metrics[key], r.design_name))
    return ok + bad


def sweep_rows(results):
    """Flatten results to CSV rows covering METRIC_COLUMNS."""
    header = ["design_name [-]", "strut_width [mm]", "status [-]"]
    header += [f"{c} [-]" for c in METRIC_COLUMNS]
    rows = []
    for r in results:
        row = [r.design_name, r.strut_width_mm, r.status]
        row += [r.metrics.get(c, "") for c in METRIC_COLUMNS]
        rows.append(row)
    return header, rows
