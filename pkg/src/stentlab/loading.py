"""Boundary conditions and analytic contact surfaces.

Contact is node-to-analytic-surface with a linear penalty on radial
penetration and elastic-anchor Coulomb friction in the surface tangent
plane: each contacting node carries a stick point in wall-material
coordinates (theta, z), a tangential spring pulls the node back to it,
and the spring force is capped at mu times the normal force by dragging
the anchor along the slip direction.  Out-of-contact nodes re-anchor at
their own position, so friction history resets on release.  Surfaces act
on the beam centerline (node positions); design diameters refer to that
centerline.

The crimping sheath is a rigid cylinder about the frame axis whose
diameter follows a schedule.  The vessel lumen is a tensor-product
surface: a piecewise-linear base radius profile along the axis modulated
by a periodic contraction pulse and a cos(2 theta) ovalisation term.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class SheathBC:
    """Crimping sheath parameters (diameters in mm, penalty N/mm/node)."""

    target_diameter: float
    penalty: float = 200.0
    friction_mu: float = 0.3
    clearance: float = 0.5       # initial radial gap beyond the widest ring
    crimp_time: float = 0.4      # pseudo-time of the diameter ramp, s
    friction_stiffness: float | None = None   # N/mm, stick spring (default: penalty)

    @property
    def stick_stiffness(self):
        return self.penalty if self.friction_stiffness is None \
            else self.friction_stiffness

    def validate(self):
        if self.target_diameter <= 0.0 or self.penalty <= 0.0:
            raise ValidationError("sheath needs positive diameter and penalty")
        if self.friction_mu < 0.0 or self.crimp_time <= 0.0:
            raise ValidationError("bad sheath friction/crimp_time")
        if self.friction_stiffness is not None and self.friction_stiffness <= 0.0:
            raise ValidationError("friction_stiffness must be positive")
        return self


@dataclass(frozen=True)
class MotionProfile:
    """Periodic lumen contraction.

    ``w(t)`` is a raised-cosine pulse that rises from 0 to 1 at
    ``peak_time`` and returns to 0 at ``period`` (C1-continuous and
    periodic).  ``a0`` scales uniform contraction, ``a2`` the cos(2 theta)
    ovalisation; both are fractions of the local base radius and are
    weighted along the axis by the piecewise-linear ``axial_variation``.
    """

    period: float = 1.0
    peak_time: float = 0.32
    a0: float = 0.30
    a2: float = 0.10
    phase: float = 0.0
    axial_variation: tuple = ((-50.0, 1.0), (0.0, 1.0), (25.0, 0.25), (60.0, 0.2))

    def validate(self):
        if not (0.0 < self.peak_time < self.period):
            raise ValidationError("peak_time must fall inside the period")
        if self.a0 < 0.0 or self.a2 < 0.0:
            raise ValidationError("negative motion amplitude")
        scales = [s for _, s in self.axial_variation]
        zs = [z for z, _ in self.axial_variation]
        if any(s < 0.0 for s in scales) or any(b <= a for a, b in zip(zs, zs[1:])):
            raise ValidationError("axial_variation must be z-sorted with scales >= 0")
        if (self.a0 + self.a2) * max(scales) >= 0.95:
            raise ValidationError("motion amplitudes would collapse the lumen")
        return self

    def pulse(self, t):
        """w(t) in [0, 1]."""
        tau = np.asarray(t) % self.period
        up = 0.5 * (1.0 - np.cos(math.pi * tau / self.peak_time))
        down = 0.5 * (1.0 + np.cos(math.pi * (tau - self.peak_time)
                                   / (self.period - self.peak_time)))
        return np.where(tau <= self.peak_time, up, down)

    def axial_scale(self, zeta):
        zs = np.array([z for z, _ in self.axial_variation])
        ss = np.array([s for _, s in self.axial_variation])
        return np.interp(zeta, zs, ss)


@dataclass(frozen=True)
class LumenModel:
    """Axisymmetric base lumen with optional contraction motion.

    ``profile`` lists (zeta, radius) control points in lumen coordinates;
    the annulus plane is the point of minimum radius.
    """

    profile: tuple
    penalty: float = 200.0
    friction_mu: float = 0.3
    motion: MotionProfile | None = None
    friction_stiffness: float | None = None   # N/mm, stick spring (default: penalty)

    @property
    def stick_stiffness(self):
        return self.penalty if self.friction_stiffness is None \
            else self.friction_stiffness

    def validate(self):
        zs = [z for z, _ in self.profile]
        rs = [r for _, r in self.profile]
        if len(self.profile) < 2:
            raise ValidationError("lumen profile needs at least 2 points")
        if any(b <= a for a, b in zip(zs, zs[1:])):
            raise ValidationError("lumen profile must be strictly z-sorted")
        if min(rs) <= 0.0 or self.penalty <= 0.0:
            raise ValidationError("lumen radii and penalty must be positive")
        if self.friction_stiffness is not None and self.friction_stiffness <= 0.0:
            raise ValidationError("friction_stiffness must be positive")
        if self.motion is not None:
            self.motion.validate()
        return self

    @property
    def zeta_range(self):
        zs = [z for z, _ in self.profile]
        return zs[0], zs[-1]

    @property
    def annulus_zeta(self):
        rs = [r for _, r in self.profile]
        return self.profile[int(np.argmin(rs))][0]

    def base_radius(self, zeta):
        zs = np.array([z for z, _ in self.profile])
        rs = np.array([r for _, r in self.profile])
        return np.interp(zeta, zs, rs)

    def radius(self, theta, zeta, t=0.0):
        """Surface radius at angle/axial position/time (lumen frame)."""
        r0 = self.base_radius(zeta)
        if self.motion is None:
            return r0 if np.ndim(theta) == 0 else np.broadcast_to(r0, np.shape(theta)).copy()
        w = self.motion.pulse(t)
        g = self.motion.axial_scale(zeta)
        mod = (self.motion.a0 + self.motion.a2
               * np.cos(2.0 * np.asarray(theta) - self.motion.phase)) * w * g
        return r0 * (1.0 - mod)


def lumen_offset(lumen: LumenModel, implantation_depth: float) -> float:
    """z shift mapping stent axial coordinates into the lumen frame.

    zeta = z - shift, chosen so the annulus plane sits ``implantation_depth``
    above the stent inflow plane (z = 0 in the reference frame).
    """
    return implantation_depth - lumen.annulus_zeta


# -------------------------------------------------------------- pure helpers
def radial_penetration(pos, surface_radius):
    """Penetration of nodes beyond a radius bound; (pen, unit radial)."""
    r = np.hypot(pos[:, 0], pos[:, 1])
    safe = np.maximum(r, 1e-12)
    er = np.zeros_like(pos)
    er[:, 0] = pos[:, 0] / safe
    er[:, 1] = pos[:, 1] / safe
    return r - surface_radius, er


def _contact_forces(pos, surface_radius, penalty, mu, k_t, anchors, f_out):
    """Accumulate penalty + stick-slip friction forces.

    ``anchors`` is an (n, 2) array of per-node stick points (theta, z) on
    the wall, updated in place: free nodes re-anchor at their current
    position, sliding nodes drag theirs onto the friction cone.  Applying
    twice at the same state is idempotent, so equilibrium residual checks
    can re-evaluate contact without perturbing the friction history.
    Returns (normal force sum, max penetration).
    """
    pen, er = radial_penetration(pos, surface_radius)
    theta = np.arctan2(pos[:, 1], pos[:, 0])
    mask = pen > 0.0
    free = ~mask
    anchors[free, 0] = theta[free]
    anchors[free, 1] = pos[free, 2]
    if not np.any(mask):
        return 0.0, 0.0
    fn_mag = penalty * pen[mask]
    f_out[mask] -= fn_mag[:, None] * er[mask]
    if mu > 0.0 and k_t > 0.0:
        idx = np.flatnonzero(mask)
        rw = np.broadcast_to(np.asarray(surface_radius, float), pen.shape)[mask]
        dth = theta[mask] - anchors[idx, 0]
        dth = (dth + np.pi) % (2.0 * np.pi) - np.pi
        ds = rw * dth                      # arc length at the current wall radius
        dz = pos[mask, 2] - anchors[idx, 1]
        ft = k_t * np.hypot(ds, dz)
        cap = mu * fn_mag
        keep = np.ones_like(ft)
        slip = ft > cap
        keep[slip] = cap[slip] / ft[slip]
        ds *= keep
        dz *= keep
        anchors[idx, 0] = theta[mask] - ds / np.maximum(rw, 1e-12)
        anchors[idx, 1] = pos[mask, 2] - dz
        et = np.zeros((len(idx), 3))
        et[:, 0] = -np.sin(theta[mask])
        et[:, 1] = np.cos(theta[mask])
        f_out[mask, 0] -= k_t * ds * et[:, 0]
        f_out[mask, 1] -= k_t * ds * et[:, 1]
        f_out[mask, 2] -= k_t * dz
    return float(np.sum(fn_mag)), float(np.max(pen[mask]))


# ------------------------------------------------------------- load objects
class SheathContact:
    """Shrinking/expanding rigid cylinder around the frame axis."""

    def __init__(self, bc: SheathBC, diameter_fn):
        self.bc = bc.validate()
        self.diameter_fn = diameter_fn
        self.force_sum = 0.0
        self.max_penetration = 0.0
        self.current_diameter = None
        self._anchors = None

    def apply(self, t, pos, vel, f, trq):
        dia = float(self.diameter_fn(t))
        self.current_diameter = dia
        if self._anchors is None or len(self._anchors) != len(pos):
            self._anchors = np.column_stack(
                [np.arctan2(pos[:, 1], pos[:, 0]), pos[:, 2]])
        self.force_sum, self.max_penetration = _contact_forces(
            pos, 0.5 * dia, self.bc.penalty, self.bc.friction_mu,
            self.bc.stick_stiffness, self._anchors, f)

    def penalty_per_node(self, n):
        return np.full(n, self.bc.penalty)


class LumenContact:
    """Moving lumen surface; ``z_shift`` per ``lumen_offset``."""

    def __init__(self, lumen: LumenModel, z_shift, motion_active=False, t_start=0.0):
        self.lumen = lumen.validate()
        self.z_shift = z_shift
        self.motion_active = motion_active
        self.t_start = t_start
        self.force_sum = 0.0
        self.max_penetration = 0.0
        self._anchors = None

    def surface_radius(self, pos, t):
        zeta = pos[:, 2] - self.z_shift
        theta = np.arctan2(pos[:, 1], pos[:, 0])
        if self.motion_active and self.lumen.motion is not None:
            return self.lumen.radius(theta, zeta, t - self.t_start)
        return self.lumen.radius(theta, zeta, 0.0) if self.lumen.motion is None \
            else self.lumen.base_radius(zeta)

    def apply(self, t, pos, vel, f, trq):
        radius = self.surface_radius(pos, t)
        if self._anchors is None or len(self._anchors) != len(pos):
            self._anchors = np.column_stack(
                [np.arctan2(pos[:, 1], pos[:, 0]), pos[:, 2]])
        self.force_sum, self.max_penetration = _contact_forces(
            pos, radius, self.lumen.penalty, self.lumen.friction_mu,
            self.lumen.stick_stiffness, self._anchors, f)

    def penalty_per_node(self, n):
        return np.full(n, self.lumen.penalty)


class PointLoads:
    """Constant nodal forces/torques."""

    def __init__(self, n_nodes, forces=None, torques=None):
        self.forces = np.zeros((n_nodes, 3))
        self.torques = np.zeros((n_nodes, 3))
        if forces:
            for node, vec in forces.items():
                self.forces[node] = vec
        if torques:
            for node, vec in torques.items():
                self.torques[node] = vec

    def apply(self, t, pos, vel, f, trq):
        f += self.forces
        trq += self.torques


class FixedDofs:
    """Zero-velocity constraint on selected node dofs."""

    def __init__(self, nodes, translations=(True, True, True),
                 rotations=(True, True, True)):
        self.nodes = np.atleast_1d(np.asarray(nodes, dtype=int))
        self.translations = tuple(translations)
        self.rotations = tuple(rotations)

    def apply(self, t, pos, vel, f, trq):
        pass

    def fixed_masks(self, n):
        mt = np.zeros((n, 3), dtype=bool)
        mr = np.zeros((n, 3), dtype=bool)
        mt[self.nodes] = self.translations
        mr[self.nodes] = self.rotations
        return mt, mr


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def ramp_schedule(t0, duration, start, stop):
    """C1 diameter schedule: smoothstep from start to stop, then hold."""

    def fn(t):
        return start + (stop - start) * smoothstep((t - t0) / duration)

    return fn
