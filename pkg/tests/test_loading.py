"""Boundary condition and contact surrogate tests."""
import numpy as np
import pytest

from stentlab.errors import ValidationError
from stentlab.loading import (FixedDofs, LumenContact, LumenModel,
                              MotionProfile, PointLoads, SheathBC,
                              SheathContact, lumen_offset, radial_penetration,
                              ramp_schedule, smoothstep)

MOTION = MotionProfile(period=1.0, peak_time=0.32, a0=0.2, a2=0.1)
LUMEN = LumenModel(profile=((-10.0, 12.0), (0.0, 11.0), (10.0, 13.0)),
                   motion=MOTION)


def test_pulse_is_periodic_and_bounded():
    t = np.linspace(0.0, 3.0, 1201)
    w = MOTION.pulse(t)
    assert np.all(w >= 0.0) and np.all(w <= 1.0 + 1e-15)
    assert abs(MOTION.pulse(0.0)) < 1e-15
    assert abs(MOTION.pulse(MOTION.peak_time) - 1.0) < 1e-15
    assert np.allclose(MOTION.pulse(t), MOTION.pulse(t + 7.0), atol=1e-12)


def test_pulse_is_smooth_at_the_joins():
    # the derivative vanishes at 0, at the peak and at the period wrap
    h = 5e-7
    for t0 in (0.0, MOTION.peak_time, MOTION.period):
        left = (MOTION.pulse(t0 - h) - MOTION.pulse(t0 - 2 * h)) / h
        right = (MOTION.pulse(t0 + 2 * h) - MOTION.pulse(t0 + h)) / h
        assert abs(left) < 1e-4 and abs(right) < 1e-4


def test_axial_scale_interpolates_and_clamps():
    m = MotionProfile(axial_variation=((0.0, 1.0), (10.0, 0.5)))
    assert m.axial_scale(0.0) == 1.0
    assert m.axial_scale(10.0) == 0.5
    assert abs(m.axial_scale(5.0) - 0.75) < 1e-15
    assert m.axial_scale(-5.0) == 1.0
    assert m.axial_scale(50.0) == 0.5


def test_motion_validation():
    with pytest.raises(ValidationError):
        MotionProfile(peak_time=2.0, period=1.0).validate()
    with pytest.raises(ValidationError):
        MotionProfile(a0=-0.1).validate()
    with pytest.raises(ValidationError):
        MotionProfile(a0=0.9, a2=0.1).validate()
    with pytest.raises(ValidationError):
        MotionProfile(axial_variation=((5.0, 1.0), (0.0, 1.0))).validate()
    MOTION.validate()


def test_lumen_radius_contracts_with_the_pulse():
    r0 = LUMEN.base_radius(0.0)
    assert r0 == 11.0
    at_peak = LUMEN.radius(0.0, 0.0, MOTION.peak_time)
    assert abs(at_peak - r0 * (1.0 - (MOTION.a0 + MOTION.a2))) < 1e-12
    # ovalisation: theta = 0 squeezes harder than theta = pi/2
    assert (LUMEN.radius(0.0, 0.0, MOTION.peak_time)
            < LUMEN.radius(np.pi / 2.0, 0.0, MOTION.peak_time))
    # no motion model: radius is the static profile
    static = LumenModel(profile=LUMEN.profile)
    assert static.radius(1.3, 0.0, t=5.0) == 11.0


def test_lumen_geometry_helpers():
    assert LUMEN.annulus_zeta == 0.0
    assert LUMEN.zeta_range == (-10.0, 10.0)
    assert abs(LUMEN.base_radius(5.0) - 12.0) < 1e-12
    shift = lumen_offset(LUMEN, implantation_depth=4.0)
    # the annulus plane must land at z = 4 in stent coordinates
    assert abs((LUMEN.annulus_zeta + shift) - 4.0) < 1e-12


def test_lumen_validation():
    with pytest.raises(ValidationError):
        LumenModel(profile=((0.0, 10.0),)).validate()
    with pytest.raises(ValidationError):
        LumenModel(profile=((5.0, 10.0), (0.0, 11.0))).validate()
    with pytest.raises(ValidationError):
        LumenModel(profile=((0.0, -1.0), (5.0, 10.0))).validate()
    with pytest.raises(ValidationError):
        SheathBC(target_diameter=-2.0).validate()
    LUMEN.validate()


def test_radial_penetration_values():
    pos = np.array([[11.0, 0.0, 0.0], [0.0, 9.0, 3.0], [0.0, 0.0, 1.0]])
    pen, er = radial_penetration(pos, 10.0)
    assert np.allclose(pen, [1.0, -1.0, -10.0], atol=1e-12)
    assert np.allclose(er[0], [1.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(er[1], [0.0, 1.0, 0.0], atol=1e-12)


def test_sheath_contact_force_hand_check():
    bc = SheathBC(target_diameter=20.0, penalty=200.0, friction_mu=0.3)
    contact = SheathContact(bc, lambda t: 20.0)
    pos = np.array([[11.0, 0.0, 0.0], [5.0, 0.0, 0.0]])
    vel = np.zeros((2, 3))
    f = np.zeros((2, 3))
    trq = np.zeros((2, 3))
    contact.apply(0.0, pos, vel, f, trq)
    # penalty 200 * 1 mm penetration; fresh contact has no stored shear
    assert abs(f[0, 0] + 200.0) < 1e-12
    assert abs(f[0, 1]) < 1e-12 and abs(f[0, 2]) < 1e-12
    assert np.allclose(f[1], 0.0, atol=0.0)
    assert abs(contact.force_sum - 200.0) < 1e-12
    assert abs(contact.max_penetration - 1.0) < 1e-12


def test_contact_friction_sticks_then_slips():
    bc = SheathBC(target_diameter=20.0, penalty=200.0, friction_mu=0.3)
    contact = SheathContact(bc, lambda t: 20.0)
    pos = np.array([[11.0, 0.0, 0.0]])
    vel = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, np.zeros((1, 3)), np.zeros((1, 3)))
    # small axial shift: elastic stick force k_t * dz below the mu*fn cap
    pos = np.array([[11.0, 0.0, 0.1]])
    f = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, f, np.zeros((1, 3)))
    assert abs(f[0, 2] + 200.0 * 0.1) < 1e-12
    # large shift: capped at mu*fn = 60 N, anchor dragged along
    pos = np.array([[11.0, 0.0, 0.5]])
    f = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, f, np.zeros((1, 3)))
    assert abs(f[0, 2] + 60.0) < 1e-12
    # re-applying at the same state repeats the same capped force
    f2 = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, f2, np.zeros((1, 3)))
    assert np.array_equal(f, f2)
    # backing off re-enters the stick regime from the dragged anchor
    pos = np.array([[11.0, 0.0, 0.45]])
    f = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, f, np.zeros((1, 3)))
    assert abs(f[0, 2] + 200.0 * (0.45 - 0.2)) < 1e-12


def test_contact_friction_circumferential_component():
    bc = SheathBC(target_diameter=20.0, penalty=200.0, friction_mu=0.3)
    contact = SheathContact(bc, lambda t: 20.0)
    pos = np.array([[11.0, 0.0, 0.0]])
    vel = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, np.zeros((1, 3)), np.zeros((1, 3)))
    # rotate the node by a small angle at constant radius
    th = 0.004
    pos = np.array([[11.0 * np.cos(th), 11.0 * np.sin(th), 0.0]])
    f = np.zeros((1, 3))
    contact.apply(0.0, pos, vel, f, np.zeros((1, 3)))
    # arc length on the wall is R_wall * dtheta (R_wall = 10)
    expected = 200.0 * 10.0 * th
    tangential = -f[0, 0] * np.sin(th) + f[0, 1] * np.cos(th)
    assert abs(tangential + expected) < 1e-9
    assert f[0, 2] == 0.0


def test_contact_friction_resets_on_release():
    bc = SheathBC(target_diameter=20.0, penalty=200.0, friction_mu=0.3)
    contact = SheathContact(bc, lambda t: 20.0)
    vel = np.zeros((1, 3))
    contact.apply(0.0, np.array([[11.0, 0.0, 0.0]]), vel,
                  np.zeros((1, 3)), np.zeros((1, 3)))
    contact.apply(0.0, np.array([[11.0, 0.0, 0.2]]), vel,
                  np.zeros((1, 3)), np.zeros((1, 3)))
    # leave contact: anchor must follow the node
    contact.apply(0.0, np.array([[5.0, 0.0, 3.0]]), vel,
                  np.zeros((1, 3)), np.zeros((1, 3)))
    f = np.zeros((1, 3))
    contact.apply(0.0, np.array([[11.0, 0.0, 3.0]]), vel, f,
                  np.zeros((1, 3)))
    assert abs(f[0, 0] + 200.0) < 1e-12
    assert abs(f[0, 2]) < 1e-12


def test_lumen_contact_motion_gating():
    lumen = LumenModel(profile=((-10.0, 10.0), (10.0, 10.0)), motion=MOTION)
    pos = np.array([[10.5, 0.0, 0.0]])
    vel = np.zeros((1, 3))
    frozen = LumenContact(lumen, z_shift=0.0, motion_active=False)
    f = np.zeros((1, 3))
    frozen.apply(MOTION.peak_time, pos, vel, f, np.zeros((1, 3)))
    static_fx = f[0, 0]
    moving = LumenContact(lumen, z_shift=0.0, motion_active=True, t_start=0.0)
    f = np.zeros((1, 3))
    moving.apply(MOTION.peak_time, pos, vel, f, np.zeros((1, 3)))
    # contracted lumen digs deeper, so the push-back is stronger
    assert f[0, 0] < static_fx < 0.0


def test_point_loads_and_fixed_masks():
    loads = PointLoads(3, forces={1: [1.0, 0.0, 0.0]},
                       torques={2: [0.0, 0.5, 0.0]})
    f = np.zeros((3, 3))
    trq = np.zeros((3, 3))
    loads.apply(0.0, None, None, f, trq)
    assert f[1, 0] == 1.0 and trq[2, 1] == 0.5
    fixed = FixedDofs([0, 2], translations=(True, False, True))
    mt, mr = fixed.fixed_masks(3)
    assert mt[0].tolist() == [True, False, True]
    assert not mt[1].any()
    assert mr[2].all()


def test_ramp_schedule_smoothstep():
    fn = ramp_schedule(0.0, 2.0, 10.0, 4.0)
    assert fn(-1.0) == 10.0
    assert fn(0.0) == 10.0
    assert abs(fn(1.0) - 7.0) < 1e-12     # midpoint of a smoothstep
    assert fn(2.0) == 4.0
    assert fn(99.0) == 4.0
    assert smoothstep(0.25) == 0.25 ** 2 * (3.0 - 0.5)
