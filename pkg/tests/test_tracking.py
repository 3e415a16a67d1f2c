"""Deformation metric tests against closed-form fixtures.

Oracles: an ellipse with diameters 13 and 11 mm has eccentricity index
1 - 11/13; two concentric rings of radii 10 and 12 mm have a radial
population standard deviation of exactly 1 mm; all metrics are invariant
under rigid motion of the whole cloud.
"""
import numpy as np
import pytest

from stentlab.errors import ValidationError
from stentlab.rotations import exp_rotvec
from stentlab.tracking import (TrackingSeries, compression,
                               eccentricity_index, fit_axis, mean_radius,
                               radial_distances, radii_deviation)

Z_AXIS = (np.zeros(3), np.array([0.0, 0.0, 1.0]))


def ring(radius, n=90, z=0.0, phase=0.0):
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False) + phase
    return np.column_stack([radius * np.cos(th), radius * np.sin(th),
                            np.full(n, z)])


def ellipse(a, b, n=180, z=0.0):
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.column_stack([a * np.cos(th), b * np.sin(th), np.full(n, z)])


def rigid(points, seed):
    rng = np.random.default_rng(seed)
    R = exp_rotvec(rng.normal(size=3))
    t = rng.uniform(-20.0, 20.0, 3)
    return points @ R.T + t


def test_circle_cases_are_exact():
    c = ring(12.0)
    assert compression(c, c) == 0.0
    assert radii_deviation(c, axis=Z_AXIS) < 1e-12
    assert eccentricity_index(c, axis=Z_AXIS) < 1e-9
    assert abs(mean_radius(c, axis=Z_AXIS) - 12.0) < 1e-12


def test_ellipse_13_11_eccentricity():
    e = ellipse(6.5, 5.5)
    expected = 1.0 - 11.0 / 13.0
    assert abs(eccentricity_index(e, axis=Z_AXIS) - expected) < 1e-6
    assert abs(eccentricity_index(e) - expected) < 1e-6


def test_two_ring_deviation_is_exactly_one():
    # axis-aligned points keep hypot exact, so the std comes out bitwise 1.0
    quad = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    pts = np.vstack([np.column_stack([10.0 * quad, np.full(4, -4.0)]),
                     np.column_stack([12.0 * quad, np.full(4, 4.0)])])
    assert radii_deviation(pts, axis=Z_AXIS) == 1.0
    dense = np.vstack([ring(10.0, n=60, z=-4.0), ring(12.0, n=60, z=4.0)])
    assert abs(radii_deviation(dense) - 1.0) < 1e-9


def test_compression_is_diametric():
    ref = ring(12.0)
    squeezed = ring(11.5)
    assert abs(compression(ref, squeezed) - 1.0) < 1e-12
    assert abs(compression(squeezed, ref) + 1.0) < 1e-12


def test_rigid_motion_invariance():
    band = np.vstack([ellipse(6.5, 5.8, n=64, z=z) for z in (-2.0, 0.0, 2.0)])
    rng = np.random.default_rng(7)
    band = band + rng.normal(0.0, 0.02, band.shape)
    ref = np.vstack([ring(6.3, n=64, z=z) for z in (-2.0, 0.0, 2.0)])
    for seed in range(5):
        moved_band = rigid(band, seed)
        moved_ref = rigid(ref, seed)
        assert abs(compression(moved_ref, moved_band)
                   - compression(ref, band)) < 1e-9
        assert abs(eccentricity_index(moved_band)
                   - eccentricity_index(band)) < 1e-9
        assert abs(radii_deviation(moved_band)
                   - radii_deviation(band)) < 1e-9


def test_fit_axis_recovers_cylinder_direction():
    rng = np.random.default_rng(11)
    base = np.vstack([ring(9.0, n=48, z=z) for z in (-6.0, -2.0, 2.0, 6.0)])
    for seed in range(4):
        R = exp_rotvec(rng.normal(size=3))
        shift = rng.uniform(-10.0, 10.0, 3)
        origin, direction = fit_axis(base @ R.T + shift)
        true_dir = R @ np.array([0.0, 0.0, 1.0])
        assert abs(abs(direction @ true_dir) - 1.0) < 1e-9
        r, _ = radial_distances(base @ R.T + shift, (origin, direction))
        assert np.allclose(r, 9.0, atol=1e-9)


def test_fit_axis_orientation_is_deterministic():
    pts = ring(5.0, n=30, z=0.0)
    pts = np.vstack([pts, ring(5.0, n=30, z=3.0)])
    _, d1 = fit_axis(pts)
    _, d2 = fit_axis(pts[::-1])
    assert d1[np.argmax(np.abs(d1))] > 0.0
    assert np.allclose(d1, d2, atol=1e-9)


def test_radial_distances_axial_coordinate():
    pts = ring(4.0, n=24, z=5.0)
    r, t = radial_distances(pts, axis=(np.zeros(3), np.array([0.0, 0.0, 1.0])))
    assert np.allclose(r, 4.0, atol=1e-12)
    assert np.allclose(t, 5.0, atol=1e-12)


def test_eccentricity_needs_enough_points():
    with pytest.raises(ValidationError):
        eccentricity_index(ring(5.0, n=5), axis=Z_AXIS)


def test_tracking_series_from_positions():
    ref = ring(12.0, n=80)
    frames = np.stack([ring(12.0, n=80), ring(11.5, n=80),
                       ellipse(12.2, 11.4, n=80)])
    series = TrackingSeries.from_positions([0.0, 0.1, 0.2], frames, ref)
    assert series.times.shape == (3,)
    assert abs(series.compression[0]) < 1e-12
    assert abs(series.compression[1] - 1.0) < 1e-12
    assert series.peak_compression() == np.max(series.compression)
    assert series.eccentricity[2] > 0.05 > series.eccentricity[0]
    assert np.all(series.deviation >= 0.0)
    assert abs(series.mean_radius[1] - 11.5) < 1e-12


def test_tracking_series_node_selection():
    ref = np.vstack([ring(12.0, n=40), ring(30.0, n=40)])
    cur = np.vstack([ring(11.0, n=40), ring(30.0, n=40)])
    inner = np.arange(40)
    series = TrackingSeries.from_positions([0.0], cur[None, :, :], ref,
                                           node_sel=inner)
    assert abs(series.compression[0] - 2.0) < 1e-12
