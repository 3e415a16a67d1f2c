"""Deformation tracking: axis fit, compression, eccentricity, deviation.

All metrics work on bare point clouds (node positions of a frame band) so
they are rigid-motion invariant by construction: the axis is fitted through
axial band centroids and radial distances are measured from that axis.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_N_AXIS_BANDS = 8
_EI_MAX_HARMONIC = 12


def fit_axis(points, n_bands=_N_AXIS_BANDS):
    """Least-squares axis through axial band centroids.

    Returns (origin, direction) with a unit direction whose sense follows
    increasing axial order.  Raises ValidationError for degenerate clouds.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise ValidationError("need at least 3 points with 3 coordinates")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] < 1e-12:
        raise ValidationError("degenerate point cloud")
    if s[2] < 1e-10 * s[0]:
        # planar ring: the symmetry axis is the plane normal
        return centroid, _oriented(vt[2])

    def refine(direction, origin):
        for _ in range(2):
            t = (pts - origin) @ direction
            lo, hi = t.min(), t.max()
            if hi - lo < 1e-9 * max(s[0], 1.0):
                return None
            # offset binning keeps symmetric node rings off the band edges
            u = (t - lo) / (hi - lo)
            bins = np.clip((u * n_bands + 0.293).astype(int), 0, n_bands - 1)
            cents, wts = [], []
            for b in range(n_bands):
                sel = bins == b
                cnt = int(np.sum(sel))
                if cnt:
                    cents.append(pts[sel].mean(axis=0))
                    wts.append(cnt)
            if len(cents) < 2:
                return None
            cents = np.asarray(cents)
            wts = np.asarray(wts, dtype=float)
            cm = (wts[:, None] * cents).sum(axis=0) / wts.sum()
            dev = np.sqrt(wts)[:, None] * (cents - cm)
            _, _, vt2 = np.linalg.svd(dev, full_matrices=False)
            new_dir = vt2[0]
            if new_dir @ direction < 0.0:
                new_dir = -new_dir
            direction = new_dir
            origin = cm
        rel = pts - origin
        tt = rel @ direction
        rad = np.linalg.norm(rel - tt[:, None] * direction, axis=1)
        # radial spread relative to size: a symmetry axis keeps radii tight
        score = rad.std() / max(rad.mean(), 1e-12)
        return origin, direction, score

    # the dominant extent axis is wrong for flat/ring clouds, so every
    # principal direction competes on radial tightness after refinement
    best = None
    for cand in vt:
        out = refine(cand, centroid)
        if out is not None and (best is None or out[2] < best[2]):
            best = out
    if best is None:
        raise ValidationError("too few occupied bands for an axis fit")
    return best[0], _oriented(best[1])


def _oriented(direction):
    """Deterministic sign: largest-magnitude component made positive."""
    k = int(np.argmax(np.abs(direction)))
    return -direction if direction[k] < 0.0 else direction


def radial_distances(points, axis=None):
    pts = np.asarray(points, dtype=float)
    origin, direction = fit_axis(pts) if axis is None else axis
    rel = pts - origin
    t = rel @ direction
    perp = rel - t[:, None] * direction
    return np.linalg.norm(perp, axis=1), t


def mean_radius(points, axis=None) -> float:
    r, _ = radial_distances(points, axis)
    return float(r.mean())


def compression(reference_points, current_points) -> float:
    """Mean-diameter reduction (positive = squeezed inward), mm."""
    return 2.0 * (mean_radius(reference_points) - mean_radius(current_points))


def radii_deviation(points, axis=None) -> float:
    """Population standard deviation of radial distances, mm."""
    r, _ = radial_distances(points, axis)
    return float(np.std(r))


def _angular_positions(points, axis):
    origin, direction = axis
    # stable in-plane basis
    seed = np.array([1.0, 0.0, 0.0])
    if abs(direction @ seed) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    u = seed - (seed @ direction) * direction
    u /= np.linalg.norm(u)
    v = np.cross(direction, u)
    rel = np.asarray(points) - origin
    x = rel @ u
    y = rel @ v
    return np.arctan2(y, x), np.hypot(x, y)


def eccentricity_index(points, axis=None, max_harmonic=_EI_MAX_HARMONIC) -> float:
    """EI = 1 - R_min/R_max of an even-harmonic fit of radius vs angle.

    Radius versus angle is least-squares fitted with cos/sin terms of even
    order up to ``max_harmonic`` (adapted down for sparse bands), then the
    fitted curve extremes are located on a dense angular sweep.  A pure
    cos(2 theta) perturbed circle of relative amplitude e gives
    2 e / (1 + e); an ellipse is captured through the higher harmonics.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 6:
        raise ValidationError("need at least 6 points for an eccentricity fit")
    ax = fit_axis(pts) if axis is None else axis
    theta, r = _angular_positions(pts, ax)
    orders = [k for k in range(2, max_harmonic + 1, 2)]
    while orders and (1 + 2 * len(orders)) > max(3, pts.shape[0] * 2 // 3):
        orders.pop()
    cols = [np.ones_like(theta)]
    for k in orders:
        cols.append(np.cos(k * theta))
        cols.append(np.sin(k * theta))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A, r, rcond=None)

    sweep = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    fit = np.full_like(sweep, coef[0])
    for j, k in enumerate(orders):
        fit += coef[1 + 2 * j] * np.cos(k * sweep) + coef[2 + 2 * j] * np.sin(k * sweep)

    def refine(idx, sign):
        # golden-section polish around the coarse extremum
        lo = sweep[idx] - 2.0 * np.pi / 4096
        hi = sweep[idx] + 2.0 * np.pi / 4096
        g = (np.sqrt(5.0) - 1.0) / 2.0

        def val(th):
            out = coef[0]
            for j, k in enumerate(orders):
                out += coef[1 + 2 * j] * np.cos(k * th) + coef[2 + 2 * j] * np.sin(k * th)
            return sign * out

        a, b = lo, hi
        c = b - g * (b - a)
        d = a + g * (b - a)
        for _ in range(60):
            if val(c) > val(d):
                b = d
            else:
                a = c
            c = b - g * (b - a)
            d = a + g * (b - a)
        th = 0.5 * (a + b)
        return sign * val(th)

    r_max = refine(int(np.argmax(fit)), 1.0)
    r_min = refine(int(np.argmin(fit)), -1.0)
    if r_max <= 0.0:
        raise ValidationError("non-positive fitted radius")
    return float(1.0 - r_min / r_max)


@dataclass
class TrackingSeries:
    """Per-sample deformation metrics of a node band over a run.

    ``compression`` is the mean-diameter reduction against the reference
    cloud (mm); the other metrics are per-sample with a freshly fitted axis.
    """

    times: np.ndarray
    compression: np.ndarray
    eccentricity: np.ndarray
    deviation: np.ndarray
    mean_radius: np.ndarray

    @classmethod
    def from_positions(cls, times, positions, reference, node_sel=None):
        """Build the series from sampled positions (samples, nodes, 3)."""
        times = np.asarray(times, dtype=float)
        positions = np.asarray(positions, dtype=float)
        ref = np.asarray(reference, dtype=float)
        if node_sel is not None:
            positions = positions[:, node_sel]
            ref = ref[node_sel]
        ref_mean = mean_radius(ref)
        n = len(times)
        comp = np.zeros(n)
        ecc = np.zeros(n)
        dev = np.zeros(n)
        mrad = np.zeros(n)
        for i in range(n):
            ax = fit_axis(positions[i])
            r, _ = radial_distances(positions[i], ax)
            mrad[i] = r.mean()
            comp[i] = 2.0 * (ref_mean - mrad[i])
            dev[i] = np.std(r)
            ecc[i] = eccentricity_index(positions[i], ax)
        return cls(times=times, compression=comp, eccentricity=ecc,
                   deviation=dev, mean_radius=mrad)

    def peak_compression(self) -> float:
        return float(np.max(self.compression))
