"""Strain-based fatigue screening on sampled fiber histories.

Each fiber point contributes one (mean strain, strain amplitude) pair over
the extraction cycle.  Classification against a constant-life envelope uses
the rectangular rule by default: fail when the amplitude exceeds the
amplitude limit or the absolute mean exceeds the mean limit.  An optional
boundary polyline replaces the rectangle with an interpolated amplitude
limit over |mean|.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class FatigueLimits:
    """Envelope limits in absolute strain (not percent)."""

    amp_limit: float = 0.004
    mean_limit: float = 0.08
    boundary: tuple | None = None   # optional ((mean, amp), ...) polyline

    def validate(self):
        if self.amp_limit <= 0.0 or self.mean_limit <= 0.0:
            raise ValidationError("limits must be positive")
        if self.boundary is not None:
            ms = [m for m, _ in self.boundary]
            if len(ms) < 2 or any(b <= a for a, b in zip(ms, ms[1:])):
                raise ValidationError("boundary must be mean-monotone with >= 2 points")
            if any(a < 0.0 for _, a in self.boundary) or ms[0] < 0.0:
                raise ValidationError("boundary must live in the first quadrant")
        return self


@dataclass
class FatigueRecord:
    """Classified strain excursion of one fiber point."""

    element: int
    station: int
    fiber: int
    region: str
    theta: float
    z: float
    eps_max: float
    eps_min: float
    eps_mean: float
    eps_amp: float
    failed: bool
    failure_mode: str   # "", "amplitude", "mean" or "amplitude+mean"


def strain_extrema(store, cycle) -> tuple:
    """(max, min) strain per point over the sampled cycle."""
    return store.cycle_extrema(cycle)


def mean_amp(eps_max, eps_min):
    """Mean and amplitude of a strain excursion."""
    eps_max = np.asarray(eps_max, dtype=float)
    eps_min = np.asarray(eps_min, dtype=float)
    if np.any(eps_min > eps_max):
        raise ValidationError("eps_min above eps_max")
    return 0.5 * (eps_max + eps_min), 0.5 * (eps_max - eps_min)


def classify(eps_mean, eps_amp, limits: FatigueLimits):
    """Failure flags and modes for arrays of mean/amplitude pairs."""
    limits.validate()
    eps_mean = np.asarray(eps_mean, dtype=float)
    eps_amp = np.asarray(eps_amp, dtype=float)
    if np.any(eps_amp < 0.0):
        raise ValidationError("negative strain amplitude")
    if limits.boundary is None:
        over_amp = eps_amp > limits.amp_limit
        over_mean = np.abs(eps_mean) > limits.mean_limit
    else:
        ms = np.array([m for m, _ in limits.boundary])
        amps = np.array([a for _, a in limits.boundary])
        am = np.abs(eps_mean)
        inside = am <= ms[-1]
        allowed = np.interp(am, ms, amps)
        over_amp = inside & (eps_amp > allowed)
        over_mean = ~inside
    failed = over_amp | over_mean
    modes = np.where(over_amp & over_mean, "amplitude+mean",
                     np.where(over_amp, "amplitude",
                              np.where(over_mean, "mean", "")))
    return failed, modes


def extract_records(store, limits: FatigueLimits, cycle=None) -> list:
    """Build classified records from a strain history store.

    ``cycle`` defaults to the last sampled cycle (the extraction cycle of
    the loading protocol).
    """
    if cycle is None:
        cycle = int(store.cycle_index.max())
    hi, lo = strain_extrema(store, cycle)
    mean, amp = mean_amp(hi, lo)
    failed, modes = classify(mean, amp, limits)
    names = store.region_names
    records = []
    for p in range(store.n_points):
        records.append(FatigueRecord(
            element=int(store.element[p]), station=int(store.station[p]),
            fiber=int(store.fiber[p]), region=names[int(store.region[p])],
            theta=float(store.theta[p]), z=float(store.z[p]),
            eps_max=float(hi[p]), eps_min=float(lo[p]),
            eps_mean=float(mean[p]), eps_amp=float(amp[p]),
            failed=bool(failed[p]), failure_mode=str(modes[p])))
    return records


def region_report(records) -> dict:
    """Per-region counts and worst excursions."""
    out = {}
    for rec in records:
        slot = out.setdefault(rec.region, {"count": 0, "failed": 0,
                                           "max_eps_amp": 0.0,
                                           "max_abs_eps_mean": 0.0})
        slot["count"] += 1
        slot["failed"] += int(rec.failed)
        slot["max_eps_amp"] = max(slot["max_eps_amp"], rec.eps_amp)
        slot["max_abs_eps_mean"] = max(slot["max_abs_eps_mean"], abs(rec.eps_mean))
    return out


def constant_life_data(records, limits: FatigueLimits, title="") -> dict:
    """Scatter dataset for a constant-life diagram, one series per region.

    Axis ranges pad the data extent by at least 10% and always include the
    envelope.  The threshold polyline is the envelope boundary.
    """
    limits.validate()
    regions = {}
    for rec in records:
        slot = regions.setdefault(rec.region, {"eps_mean": [], "eps_amp": [],
                                               "failed": []})
        slot["eps_mean"].append(rec.eps_mean)
        slot["eps_amp"].append(rec.eps_amp)
        slot["failed"].append(rec.failed)
    if limits.boundary is None:
        threshold = [(-limits.mean_limit, 0.0), (-limits.mean_limit, limits.amp_limit),
                     (limits.mean_limit, limits.amp_limit), (limits.mean_limit, 0.0)]
    else:
        threshold = [(float(m), float(a)) for m, a in limits.boundary]
    all_means = [m for slot in regions.values() for m in slot["eps_mean"]]
    all_amps = [a for slot in regions.values() for a in slot["eps_amp"]]
    all_means += [m for m, _ in threshold]
    all_amps += [a for _, a in threshold] + [0.0]
    lo_x, hi_x = min(all_means), max(all_means)
    lo_y, hi_y = min(all_amps), max(all_amps)
    pad_x = 0.1 * max(hi_x - lo_x, 1e-6)
    pad_y = 0.1 * max(hi_y - lo_y, 1e-6)
    return {"regions": regions, "threshold": threshold,
            "x_range": (lo_x - pad_x, hi_x + pad_x),
            "y_range": (max(lo_y - pad_y, 0.0) if lo_y >= 0.0 else lo_y - pad_y,
                        hi_y + pad_y),
            "title": title,
            "xlabel": "mean strain [-]", "ylabel": "strain amplitude [-]"}


def polar_projection(records, title="") -> dict:
    """Unrolled (theta, z) map of per-site worst strain amplitude.

    Sites sharing a surface location (fibers of one Gauss station) collapse
    to their maximum amplitude; failed flags OR together.
    """
    sites = {}
    for rec in records:
        key = (rec.element, rec.station)
        cur = sites.get(key)
        if cur is None or rec.eps_amp > cur["eps_amp"]:
            sites[key] = {"theta": rec.theta, "z": rec.z, "eps_amp": rec.eps_amp,
                          "failed": rec.failed or (cur["failed"] if cur else False),
                          "region": rec.region}
        elif rec.failed:
            cur["failed"] = True
    keys = sorted(sites)
    return {"theta": np.array([sites[k]["theta"] for k in keys]),
            "z": np.array([sites[k]["z"] for k in keys]),
            "eps_amp": np.array([sites[k]["eps_amp"] for k in keys]),
            "failed": np.array([sites[k]["failed"] for k in keys]),
            "region": [sites[k]["region"] for k in keys],
            "title": title,
            "xlabel": "circumferential angle [rad]", "ylabel": "axial position [mm]"}
