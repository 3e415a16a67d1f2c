"""Explicit corotational beam solver.

Elements are two-node Euler-Bernoulli beams.  Each step extracts the
deformational part of the motion in a corotated element frame (chord
direction plus the mean nodal rotation of the reference wall normal),
evaluates fiber strains at Gauss stations along the length and Gauss points
over the rectangular cross-section, runs the superelastic update, and
integrates the section resultants back to self-equilibrated nodal forces.
Axial fiber strain uses the logarithmic stretch of the chord.  Torsion is
linear elastic with the austenite shear modulus.

Time integration is lumped-mass central difference with mass-proportional
damping; quasi-static phases run as dynamic relaxation.  Variable mass
scaling raises element densities (and nodal rotary inertia) so the Courant
limit sits above ``target_dt`` regardless of mesh size, with contact
penalty stiffness folded into the nodal mass requirement.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (SolverBlowupError, RelaxationTimeoutError, ValidationError)
from .material import stress_tables, superelastic_update, tangent_array
from .rotations import exp_rotvec, log_rotmat, orthonormalize

_ORTHO_EVERY = 512


@dataclass(frozen=True)
class SolverConfig:
    target_dt: float = 1e-4                 # s, step used when mass scaling is on
    mass_scaling_enabled: bool = True
    mass_scaling_floor: float = 1.0         # min density multiplier
    damping: float = 300.0                  # mass-proportional Rayleigh, 1/s
    fiber_grid: tuple = (2, 2)              # (n_width, n_thickness) Gauss points
    stations_per_element: int = 2           # Gauss stations along the length
    quasistatic_ke_ratio_limit: float = 0.05
    density: float = 6.45e-9                # tonne/mm^3
    safety: float = 1.5                     # extra margin on the scaled Courant limit
    relax_ratio: float = 1e-5               # KE/SE convergence target for relaxation
    relax_force_ratio: float = 5e-3         # unbalanced-force convergence target
    relax_window: int = 5                   # consecutive passing checks required
    relax_check_every: int = 50
    max_relax_steps: int = 500000
    blowup_check_every: int = 50

    def validate(self):
        if self.target_dt <= 0.0 or self.density <= 0.0:
            raise ValidationError("target_dt and density must be positive")
        if self.stations_per_element < 1:
            raise ValidationError("stations_per_element < 1")
        if min(self.fiber_grid) < 1:
            raise ValidationError("fiber grid must be at least 1x1")
        if not (0.0 < self.quasistatic_ke_ratio_limit < 1.0):
            raise ValidationError("ke ratio limit outside (0, 1)")
        if self.damping < 0.0 or self.safety < 1.0 or self.mass_scaling_floor < 1.0:
            raise ValidationError("bad damping/safety/floor")
        return self


@dataclass
class SolverState:
    """Snapshot of the dynamic system.

    Rotations are stored as per-node rotation matrices; fiber arrays are
    shaped (elements, stations, fibers).  Energy fields accumulate internal
    work, external work and damping dissipation from the start of stepping.
    """

    time: float
    pos: np.ndarray
    rot: np.ndarray
    vel: np.ndarray
    ang_vel: np.ndarray
    fib_strain: np.ndarray
    fib_stress: np.ndarray
    fib_xi: np.ndarray
    fib_eps_tr: np.ndarray
    kinetic_energy: float = 0.0
    strain_energy: float = 0.0
    external_work: float = 0.0
    damping_dissipation: float = 0.0
    energy_trace: list = field(default_factory=list)

    def displacements(self, frame):
        return self.pos - frame.nodes

    def copy(self):
        return SolverState(
            time=self.time, pos=self.pos.copy(), rot=self.rot.copy(),
            vel=self.vel.copy(), ang_vel=self.ang_vel.copy(),
            fib_strain=self.fib_strain.copy(), fib_stress=self.fib_stress.copy(),
            fib_xi=self.fib_xi.copy(), fib_eps_tr=self.fib_eps_tr.copy(),
            kinetic_energy=self.kinetic_energy, strain_energy=self.strain_energy,
            external_work=self.external_work,
            damping_dissipation=self.damping_dissipation,
            energy_trace=list(self.energy_trace))


def initial_state(frame, config: SolverConfig) -> SolverState:
    """Stress-free state at the reference geometry."""
    n = frame.n_nodes
    n_el = frame.n_elements
    s = config.stations_per_element
    f = config.fiber_grid[0] * config.fiber_grid[1]
    shape = (n_el, s, f)
    return SolverState(
        time=0.0,
        pos=frame.nodes.astype(float).copy(),
        rot=np.broadcast_to(np.eye(3), (n, 3, 3)).copy(),
        vel=np.zeros((n, 3)), ang_vel=np.zeros((n, 3)),
        fib_strain=np.zeros(shape), fib_stress=np.zeros(shape),
        fib_xi=np.zeros(shape), fib_eps_tr=np.zeros(shape))


def _reference_triads(frame):
    """Per-element [chord, transverse, wall-normal] triads at reference."""
    a = frame.nodes[frame.elements[:, 0]]
    b = frame.nodes[frame.elements[:, 1]]
    d = b - a
    length = np.linalg.norm(d, axis=1)
    e1 = d / length[:, None]
    mid = 0.5 * (a + b)
    radial = np.column_stack([mid[:, 0], mid[:, 1], np.zeros(len(mid))])
    e3 = radial - np.einsum("ei,ei->e", radial, e1)[:, None] * e1
    n3 = np.linalg.norm(e3, axis=1)
    deg = n3 < 1e-9
    if np.any(deg):  # on-axis or radial chords: fall back to any perpendicular
        helper = np.zeros((int(deg.sum()), 3))
        helper[:, 2] = 1.0
        helper[np.abs(e1[deg, 2]) > 0.9] = (1.0, 0.0, 0.0)
        e3[deg] = helper - np.einsum("ei,ei->e", helper, e1[deg])[:, None] * e1[deg]
        n3 = np.linalg.norm(e3, axis=1)
    e3 /= n3[:, None]
    e2 = np.cross(e3, e1)
    return np.stack([e1, e2, e3], axis=-1), length


class FrameEngine:
    """Preassembled kernels and in-place state for fast stepping.

    The functional wrappers ``step``/``relax_to_equilibrium`` build one of
    these per call; scenario drivers keep one alive for a whole run.
    """

    def __init__(self, frame, params, config: SolverConfig, loads=(), temperature=None):
        config.validate()
        params.validate()
        self.frame = frame
        self.params = params
        self.config = config
        self.loads = list(loads)
        self.T = params.T0 if temperature is None else temperature
        self.tables = stress_tables(params, self.T)

        self.idx_a = frame.elements[:, 0]
        self.idx_b = frame.elements[:, 1]
        self.E0, self.L0 = _reference_triads(frame)
        self.e3_ref = self.E0[:, :, 2].copy()

        # cross-section fiber pattern (shared grid, per-element dimensions)
        gw, gt = config.fiber_grid
        pw, wyw = leggauss(gw)
        pt, wyt = leggauss(gt)
        pat_y = np.repeat(pw, gt)
        pat_z = np.tile(pt, gw)
        pat_w = np.repeat(wyw, gt) * np.tile(wyt, gw) / 4.0
        width = np.array([frame.sections[i].width for i in frame.section_id])
        thick = np.array([frame.sections[i].thickness for i in frame.section_id])
        self.fib_y = 0.5 * width[:, None] * pat_y[None, :]
        self.fib_z = 0.5 * thick[:, None] * pat_z[None, :]
        self.fib_A = (width * thick)[:, None] * pat_w[None, :]
        self.sec_area = width * thick
        self.sec_Imax = np.maximum(width * thick ** 3, thick * width ** 3) / 12.0

        # length stations
        ns = config.stations_per_element
        ps, ws = leggauss(ns)
        xi_s = 0.5 + 0.5 * ps
        self.st_w = 0.5 * ws
        self.B1 = -4.0 + 6.0 * xi_s
        self.B2 = -2.0 + 6.0 * xi_s

        G_A = params.E_A / (2.0 * (1.0 + params.nu_A))
        J = np.array([frame.sections[i].torsion_J for i in frame.section_id])
        self.GJ_L0 = G_A * J / self.L0
        self.GJ = G_A * J

        self._build_masses()
        self._load_masks()

        self.state = initial_state(frame, config)
        self._step_count = 0
        self._f_int = np.zeros((frame.n_nodes, 3))
        self._t_int = np.zeros((frame.n_nodes, 3))
        self._f_ext = np.zeros((frame.n_nodes, 3))
        self._t_ext = np.zeros((frame.n_nodes, 3))

    # ------------------------------------------------------------- masses
    def _build_masses(self):
        cfg = self.config
        rho = cfg.density
        n = self.frame.n_nodes
        e_bound = max(self.params.E_A, self.params.E_M)
        m_el_phys = rho * self.sec_area * self.L0

        if cfg.mass_scaling_enabled:
            dt_eff = cfg.target_dt * cfg.safety
            dt_nat = self.L0 / math.sqrt(e_bound / rho)
            factor = np.maximum(cfg.mass_scaling_floor, (dt_eff / dt_nat) ** 2)
        else:
            factor = np.full(self.frame.n_elements, cfg.mass_scaling_floor)
        self.rho_scaled = rho * factor
        m_el = m_el_phys * factor

        self.mass = np.zeros(n)
        np.add.at(self.mass, self.idx_a, 0.5 * m_el)
        np.add.at(self.mass, self.idx_b, 0.5 * m_el)

        # rotary inertia sized against the rotational stiffness sum
        k_rot = 2.0 * (4.0 * e_bound * self.sec_Imax + self.GJ) / self.L0
        i_phys = 0.5 * m_el * (self.L0 ** 2 / 12.0 + 2.0 * self.sec_Imax / self.sec_area)
        self.inertia = np.zeros(n)
        if cfg.mass_scaling_enabled:
            dt_eff = cfg.target_dt * cfg.safety
            i_req = k_rot * dt_eff ** 2 / 2.0
            contrib = np.maximum(i_phys, i_req)
        else:
            contrib = i_phys
        np.add.at(self.inertia, self.idx_a, contrib)
        np.add.at(self.inertia, self.idx_b, contrib)

        # contact penalties stiffen nodes; add matching mass
        if cfg.mass_scaling_enabled:
            dt_eff = cfg.target_dt * cfg.safety
            k_pen = np.zeros(n)
            for load in self.loads:
                pen = getattr(load, "penalty_per_node", None)
                if pen is not None:
                    k_pen += pen(n)
            self.mass += k_pen * dt_eff ** 2 / 2.0

        m_phys_total = float(np.sum(m_el_phys))
        self.added_mass_fraction = float(np.sum(self.mass) - m_phys_total) / m_phys_total

    def _load_masks(self):
        n = self.frame.n_nodes
        fixed_t = np.zeros((n, 3), dtype=bool)
        fixed_r = np.zeros((n, 3), dtype=bool)
        for load in self.loads:
            masks = getattr(load, "fixed_masks", None)
            if masks is not None:
                mt, mr = masks(n)
                fixed_t |= mt
                fixed_r |= mr
        self.fixed_t = fixed_t
        self.fixed_r = fixed_r

    # -------------------------------------------------------------- state
    def set_state(self, state: SolverState):
        self.state = state.copy()

    def get_state(self) -> SolverState:
        return self.state.copy()

    # ------------------------------------------------------------- forces
    def _element_forces(self, pos, rot, commit):
        st = self.state
        a, b = self.idx_a, self.idx_b
        d = pos[b] - pos[a]
        length = np.sqrt(np.einsum("ei,ei->e", d, d))
        e1 = d / length[:, None]
        r3 = 0.5 * (np.einsum("eij,ej->ei", rot[a], self.e3_ref)
                    + np.einsum("eij,ej->ei", rot[b], self.e3_ref))
        e2 = np.cross(r3, e1)
        e2 /= np.linalg.norm(e2, axis=1)[:, None]
        e3 = np.cross(e1, e2)
        En = np.stack([e1, e2, e3], axis=-1)

        Ma = np.einsum("eji,ejk,ekl->eil", En, rot[a], self.E0)
        Mb = np.einsum("eji,ejk,ekl->eil", En, rot[b], self.E0)
        tha = log_rotmat(Ma)
        thb = log_rotmat(Mb)

        eps0 = np.log(length / self.L0)
        inv_L0 = 1.0 / self.L0
        k2 = (np.outer(tha[:, 1], self.B1) + np.outer(thb[:, 1], self.B2)) * inv_L0[:, None]
        k3 = (np.outer(tha[:, 2], self.B1) + np.outer(thb[:, 2], self.B2)) * inv_L0[:, None]

        strain = (eps0[:, None, None]
                  + self.fib_z[:, None, :] * k2[:, :, None]
                  - self.fib_y[:, None, :] * k3[:, :, None])
        stress, xi, eps_tr = superelastic_update(strain, st.fib_xi, st.fib_eps_tr,
                                                 self.tables)
        if commit:
            st.fib_strain = strain
            st.fib_stress = stress
            st.fib_xi = xi
            st.fib_eps_tr = eps_tr

        N_s = np.einsum("esf,ef->es", stress, self.fib_A)
        M2_s = np.einsum("esf,ef->es", stress, self.fib_A * self.fib_z)
        M3_s = -np.einsum("esf,ef->es", stress, self.fib_A * self.fib_y)
        Nbar = N_s @ self.st_w
        m2a = M2_s @ (self.st_w * self.B1)
        m2b = M2_s @ (self.st_w * self.B2)
        m3a = M3_s @ (self.st_w * self.B1)
        m3b = M3_s @ (self.st_w * self.B2)
        Mt = self.GJ_L0 * (thb[:, 0] - tha[:, 0])

        sh2 = (m3a + m3b) / length
        sh3 = (m2a + m2b) / length
        fa = np.stack([-Nbar, sh2, -sh3], axis=1)
        fb = -fa
        ta = np.stack([-Mt, m2a, m3a], axis=1)
        tb = np.stack([Mt, m2b, m3b], axis=1)

        Fa = np.einsum("eij,ej->ei", En, fa)
        Fb = np.einsum("eij,ej->ei", En, fb)
        Ta = np.einsum("eij,ej->ei", En, ta)
        Tb = np.einsum("eij,ej->ei", En, tb)
        return Fa, Fb, Ta, Tb

    def _assemble_internal(self, commit=True):
        Fa, Fb, Ta, Tb = self._element_forces(self.state.pos, self.state.rot, commit)
        n = self.frame.n_nodes
        idx = np.concatenate([self.idx_a, self.idx_b])
        fv = np.concatenate([Fa, Fb])
        tv = np.concatenate([Ta, Tb])
        for c in range(3):
            self._f_int[:, c] = np.bincount(idx, weights=fv[:, c], minlength=n)
            self._t_int[:, c] = np.bincount(idx, weights=tv[:, c], minlength=n)
        return self._f_int, self._t_int

    def compute_internal(self):
        """Internal nodal forces/torques without committing fiber state."""
        saved = (self.state.fib_strain, self.state.fib_stress,
                 self.state.fib_xi, self.state.fib_eps_tr)
        f, t = self._assemble_internal(commit=False)
        (self.state.fib_strain, self.state.fib_stress,
         self.state.fib_xi, self.state.fib_eps_tr) = saved
        return f.copy(), t.copy()

    # ------------------------------------------------------------ stepping
    def step_once(self, dt):
        st = self.state
        f_int, t_int = self._assemble_internal(commit=True)
        self._f_ext.fill(0.0)
        self._t_ext.fill(0.0)
        for load in self.loads:
            load.apply(st.time, st.pos, st.vel, self._f_ext, self._t_ext)

        acc = (self._f_ext - f_int) / self.mass[:, None]
        ang_acc = (self._t_ext - t_int) / self.inertia[:, None]
        c = 0.5 * self.config.damping * dt
        v_old = st.vel
        w_old = st.ang_vel
        v_new = ((1.0 - c) * v_old + dt * acc) / (1.0 + c)
        w_new = ((1.0 - c) * w_old + dt * ang_acc) / (1.0 + c)
        v_new[self.fixed_t] = 0.0
        w_new[self.fixed_r] = 0.0

        v_mid = 0.5 * (v_old + v_new)
        w_mid = 0.5 * (w_old + w_new)
        st.strain_energy += dt * (np.einsum("ni,ni->", f_int, v_mid)
                                  + np.einsum("ni,ni->", t_int, w_mid))
        st.external_work += dt * (np.einsum("ni,ni->", self._f_ext, v_mid)
                                  + np.einsum("ni,ni->", self._t_ext, w_mid))
        st.damping_dissipation += dt * self.config.damping * (
            np.einsum("n,ni,ni->", self.mass, v_mid, v_mid)
            + np.einsum("n,ni,ni->", self.inertia, w_mid, w_mid))

        st.vel = v_new
        st.ang_vel = w_new
        st.pos = st.pos + dt * v_new
        st.rot = exp_rotvec(dt * w_new) @ st.rot
        st.kinetic_energy = 0.5 * (np.einsum("n,ni,ni->", self.mass, v_new, v_new)
                                   + np.einsum("n,ni,ni->", self.inertia, w_new, w_new))
        st.time += dt
        self._step_count += 1
        if self._step_count % _ORTHO_EVERY == 0:
            st.rot = orthonormalize(st.rot)
        if self._step_count % self.config.blowup_check_every == 0:
            self._check_finite()

    def _check_finite(self):
        st = self.state
        if not np.all(np.isfinite(st.pos)):
            bad = int(np.argwhere(~np.isfinite(st.pos))[0, 0])
            raise SolverBlowupError(f"non-finite position at node {bad}, t={st.time:.6g}",
                                    time=st.time, node=bad)
        peak = float(np.max(np.abs(st.pos)))
        if peak > 1e6:
            raise SolverBlowupError(f"position magnitude {peak:.3g} mm, t={st.time:.6g}",
                                    time=st.time)

    def record_energy(self):
        st = self.state
        st.energy_trace.append((st.time, st.kinetic_energy, st.strain_energy,
                                st.external_work, st.damping_dissipation))

    @property
    def energy_trace(self):
        return self.state.energy_trace

    def run(self, n_steps, dt=None, sample_every=0, sampler=None):
        dt = self.config.target_dt if dt is None else dt
        for i in range(n_steps):
            self.step_once(dt)
            if sample_every and (i + 1) % sample_every == 0:
                self.record_energy()
                if sampler is not None:
                    sampler(self, i + 1)

    def ke_ratio(self):
        st = self.state
        return st.kinetic_energy / max(abs(st.strain_energy), 1e-12)

    def residual_ratio(self):
        """Largest unbalanced free-dof force over the working force scale.

        A velocity criterion alone can pass while the structure still
        creeps under heavy damping, so relaxation gates on this too."""
        f_int, t_int = self.compute_internal()
        f_ext = np.zeros_like(f_int)
        t_ext = np.zeros_like(t_int)
        st = self.state
        for load in self.loads:
            load.apply(st.time, st.pos, st.vel, f_ext, t_ext)
        res_f = np.where(self.fixed_t, 0.0, f_ext - f_int)
        res_t = np.where(self.fixed_r, 0.0, t_ext - t_int)
        scale_f = max(np.abs(f_int).max(), np.abs(f_ext).max(), 1e-9)
        scale_t = max(np.abs(t_int).max(), np.abs(t_ext).max(), 1e-9)
        return max(float(np.abs(res_f).max()) / scale_f,
                   float(np.abs(res_t).max()) / scale_t)

    def relax(self, dt=None, ratio=None, max_steps=None, damping=None,
              force_ratio=None):
        """Dynamic relaxation until KE/SE and the force residual stay under
        their targets for ``relax_window`` consecutive checks.

        Raises RelaxationTimeoutError (with the sampled energy trace) if the
        targets are not sustained within ``max_steps``.
        """
        cfg = self.config
        dt = cfg.target_dt if dt is None else dt
        ratio = cfg.relax_ratio if ratio is None else ratio
        force_ratio = cfg.relax_force_ratio if force_ratio is None else force_ratio
        max_steps = cfg.max_relax_steps if max_steps is None else max_steps
        if damping is not None:
            self.config = replace(cfg, damping=damping)
        try:
            good = 0
            steps = 0
            trace = []
            while steps < max_steps:
                for _ in range(cfg.relax_check_every):
                    self.step_once(dt)
                steps += cfg.relax_check_every
                self.record_energy()
                r = self.ke_ratio()
                rr = self.residual_ratio() if r < ratio else np.nan
                trace.append((self.state.time, r, rr))
                good = good + 1 if (r < ratio and rr < force_ratio) else 0
                if good >= cfg.relax_window:
                    return self.state
            raise RelaxationTimeoutError(
                f"relaxation missed KE/SE < {ratio:g} with residual < "
                f"{force_ratio:g} in {max_steps} steps", trace=trace)
        finally:
            if damping is not None:
                self.config = cfg

    # ---------------------------------------------------------- stability
    def stable_dt_estimate(self):
        """Courant-style bound: min over elements of length / wave speed,
        using the current max fiber tangent per element and the scaled
        density."""
        tang = tangent_array(self.state.fib_stress, self.state.fib_xi,
                             self.state.fib_eps_tr, self.tables)
        e_el = np.max(tang.reshape(self.frame.n_elements, -1), axis=1)
        c = np.sqrt(e_el / self.rho_scaled)
        return float(np.min(self.L0 / c))


# ------------------------------------------------------------ public ops
def step(state, frame, params, loads, config, dt) -> SolverState:
    """Advance one central-difference step (functional wrapper)."""
    eng = FrameEngine(frame, params, config, loads)
    eng.set_state(state)
    if not config.mass_scaling_enabled and dt > eng.stable_dt_estimate():
        raise ValidationError("dt exceeds the stable increment estimate")
    eng.step_once(dt)
    return eng.get_state()


def relax_to_equilibrium(state, frame, params, loads, config,
                         ratio=None, max_steps=None) -> SolverState:
    eng = FrameEngine(frame, params, config, loads)
    eng.set_state(state)
    return eng.relax(ratio=ratio, max_steps=max_steps).copy()


def stable_dt(state, frame, params, config) -> float:
    eng = FrameEngine(frame, params, config)
    eng.set_state(state)
    return eng.stable_dt_estimate()
