"""Rotation helper tests: exp/log round trips and orthonormality."""
import numpy as np

from stentlab.rotations import exp_rotvec, log_rotmat, orthonormalize, skew


def test_skew_reproduces_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert np.allclose(skew(a) @ b, np.cross(a, b), atol=1e-14)
        assert np.allclose(skew(a).T, -skew(a), atol=0.0)


def test_exp_of_zero_is_identity():
    assert np.allclose(exp_rotvec(np.zeros(3)), np.eye(3), atol=0.0)


def test_exp_gives_proper_rotations():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.normal(size=3)
        R = exp_rotvec(w)
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(R) - 1.0) < 1e-12


def test_exp_rotates_about_axis_by_angle():
    R = exp_rotvec(np.array([0.0, 0.0, np.pi / 2.0]))
    assert np.allclose(R @ np.array([1.0, 0.0, 0.0]),
                       np.array([0.0, 1.0, 0.0]), atol=1e-14)


def test_log_exp_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(50):
        w = rng.normal(size=3)
        w *= rng.uniform(1e-8, 0.999 * np.pi) / np.linalg.norm(w)
        assert np.allclose(log_rotmat(exp_rotvec(w)), w, atol=1e-10)


def test_log_near_pi_angle():
    w = np.array([0.0, 3.1, 0.0])
    assert np.allclose(log_rotmat(exp_rotvec(w)), w, atol=1e-8)


def test_orthonormalize_restores_drifted_matrix():
    rng = np.random.default_rng(3)
    R = exp_rotvec(rng.normal(size=3))
    drifted = R + 1e-6 * rng.normal(size=(3, 3))
    Q = orthonormalize(drifted)
    assert np.allclose(Q @ Q.T, np.eye(3), atol=1e-12)
    assert np.max(np.abs(Q - R)) < 1e-5
    assert np.allclose(orthonormalize(Q), Q, atol=1e-12)
