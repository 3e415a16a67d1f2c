"""Loading protocol drivers: crimp, radial force, deploy, beat cycles.

Each driver runs the explicit engine through a smooth boundary schedule
followed by dynamic relaxation, mirroring a quasi-static laboratory
protocol.  Pseudo-time is continuous across phases.
"""
from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import (DeploymentError, DriftError, InfeasibleCrimpError,
                     ValidationError)
from .loading import (LumenContact, LumenModel, SheathBC, SheathContact,
                      lumen_offset, radial_penetration, ramp_schedule)
from .solver import FrameEngine, SolverConfig, initial_state

#: fraction of total height the centroid may drift before flagging
DRIFT_FRACTION = 0.25


def min_crimp_diameter(design) -> float:
    """Kinematic packing bound: struts side by side around the circumference."""
    return 2.0 * design.n_cells * design.strut_width / math.pi


def max_node_diameter(pos) -> float:
    return 2.0 * float(np.max(np.hypot(pos[:, 0], pos[:, 1])))


def sheath_normal_force(state, diameter, penalty) -> float:
    """Total outward normal force carried by a sheath at ``diameter``."""
    pen, _ = radial_penetration(state.pos, 0.5 * diameter)
    return float(penalty * np.sum(np.maximum(pen, 0.0)))


def crimp(state, frame, params, sheath: SheathBC, config: SolverConfig,
          relax_ratio=1e-4, extra_loads=(), engine_out=None):
    """Crimp the frame into a shrinking sheath and relax at the target.

    Raises InfeasibleCrimpError when the target diameter is below the
    packing bound of the design.
    """
    sheath.validate()
    if sheath.target_diameter < min_crimp_diameter(frame.design):
        raise InfeasibleCrimpError(
            f"target {sheath.target_diameter:.3g} mm below packing bound "
            f"{min_crimp_diameter(frame.design):.3g} mm")
    start_dia = max_node_diameter(state.pos) + 2.0 * sheath.clearance
    if sheath.target_diameter >= start_dia:
        raise ValidationError("crimp target is not below the current envelope")

    schedule = ramp_schedule(state.time, sheath.crimp_time, start_dia,
                             sheath.target_diameter)
    contact = SheathContact(sheath, schedule)
    engine = FrameEngine(frame, params, config, [contact, *extra_loads])
    engine.set_state(state)
    n_ramp = int(round(sheath.crimp_time / config.target_dt))
    engine.run(n_ramp, sample_every=max(1, n_ramp // 50))
    engine.relax(ratio=relax_ratio)
    if engine_out is not None:
        engine_out.append(engine)
    return engine.get_state()


@dataclass
class RadialForceCurve:
    diameters: np.ndarray
    forces: np.ndarray
    design_name: str = ""


def radial_force_curve(frame, params, diameters, config: SolverConfig,
                       sheath: SheathBC | None = None,
                       relax_ratio=1e-4) -> RadialForceCurve:
    """Quasi-static radial force at a descending ladder of sheath diameters.

    Continuation: each diameter starts from the previous relaxed state.
    """
    dia = np.asarray(diameters, dtype=float)
    if len(dia) < 1 or np.any(np.diff(dia) >= 0.0):
        raise ValidationError("diameters must be strictly descending")
    if sheath is None:
        sheath = SheathBC(target_diameter=float(dia[-1]))
    if dia[-1] < min_crimp_diameter(frame.design):
        raise InfeasibleCrimpError("smallest diameter below packing bound")

    state = initial_state(frame, config)
    start_dia = max_node_diameter(state.pos) + 2.0 * sheath.clearance
    forces = np.zeros(len(dia))
    current = {"d0": start_dia, "d1": start_dia, "t0": 0.0, "T": 1.0}

    def schedule(t):
        u = (t - current["t0"]) / current["T"]
        u = min(max(u, 0.0), 1.0)
        s = u * u * (3.0 - 2.0 * u)
        return current["d0"] + (current["d1"] - current["d0"]) * s

    contact = SheathContact(sheath, schedule)
    engine = FrameEngine(frame, params, config, [contact])
    engine.set_state(state)
    prev = start_dia
    for i, d in enumerate(dia):
        seg_time = sheath.crimp_time * max(abs(prev - d) / max(start_dia - dia[-1], 1e-9), 0.05)
        current.update(d0=prev, d1=float(d), t0=engine.state.time, T=seg_time)
        engine.run(int(round(seg_time / config.target_dt)))
        engine.relax(ratio=relax_ratio)
        forces[i] = sheath_normal_force(engine.state, float(d), sheath.penalty)
        prev = float(d)
    return RadialForceCurve(diameters=dia, forces=forces,
                            design_name=frame.design.name)


def release_diameter(frame) -> float:
    ref = max_node_diameter(frame.nodes)
    return ref + 4.0


def deploy(crimped_state, frame, params, lumen: LumenModel,
           implantation_depth: float, config: SolverConfig,
           deploy_time=0.4, relax_ratio=1e-4, damping=40.0, engine_out=None):
    """Withdraw the sheath inside a lumen and relax to the seated state.

    The lumen is positioned so its annulus plane sits ``implantation_depth``
    above the stent inflow plane (reference z = 0).  Raises DeploymentError
    when the released frame ends up free of lumen contact despite oversize.

    Free expansion is creep-limited under the heavy scaled masses, so the
    release ramp runs at its own (lighter) damping; the final relaxation
    settles at the configured damping, and the equilibrium reached does
    not depend on either value.
    """
    lumen.validate()
    settle_damping = config.damping
    if damping is not None:
        config = replace(config, damping=damping)
    z_shift = lumen_offset(lumen, implantation_depth)
    zeta_lo, zeta_hi = lumen.zeta_range
    z_top = frame.design.total_height
    if -z_shift < zeta_lo or z_top - z_shift > zeta_hi:
        raise ValidationError("lumen profile does not cover the stent span")

    start_dia = max_node_diameter(crimped_state.pos) + 0.2
    sheath = SheathBC(target_diameter=start_dia, crimp_time=deploy_time)
    schedule = ramp_schedule(crimped_state.time, deploy_time, start_dia,
                             release_diameter(frame))
    sheath_load = SheathContact(sheath, schedule)
    lumen_load = LumenContact(lumen, z_shift, motion_active=False)
    engine = FrameEngine(frame, params, config, [sheath_load, lumen_load])
    engine.set_state(crimped_state)
    n_ramp = int(round(deploy_time / config.target_dt))
    engine.run(n_ramp, sample_every=max(1, n_ramp // 50))
    engine.relax(ratio=relax_ratio, damping=settle_damping)
    state = engine.get_state()

    anchorage = anchorage_force(state, lumen, implantation_depth)
    oversize = max_node_diameter(frame.nodes) / 2.0 - float(
        np.min(lumen.base_radius(np.linspace(-z_shift, z_top - z_shift, 64))))
    if oversize > 0.05 and anchorage < 1e-6:
        raise DeploymentError("released frame lost lumen contact")
    if engine_out is not None:
        engine_out.append(engine)
    return state


def anchorage_force(state, lumen: LumenModel, implantation_depth: float) -> float:
    """Sum of lumen contact normal force magnitudes at the resting surface."""
    z_shift = lumen_offset(lumen, implantation_depth)
    zeta = state.pos[:, 2] - z_shift
    pen, _ = radial_penetration(state.pos, lumen.base_radius(zeta))
    return float(lumen.penalty * np.sum(np.maximum(pen, 0.0)))


@dataclass
class StrainHistoryStore:
    """Sampled fiber strain histories over the beat phase.

    ``strains`` is (samples, points) where a point is one fiber at one
    Gauss station; metadata arrays map points back to the frame and to
    reference surface coordinates (theta, z) for projections.
    """

    times: np.ndarray
    cycle_index: np.ndarray
    strains: np.ndarray
    element: np.ndarray
    station: np.ndarray
    fiber: np.ndarray
    region: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    region_names: tuple

    @property
    def n_points(self):
        return self.strains.shape[1]

    def cycle_extrema(self, cycle):
        sel = self.cycle_index == cycle
        if not np.any(sel):
            raise ValidationError(f"no samples in cycle {cycle}")
        block = self.strains[sel]
        return block.max(axis=0), block.min(axis=0)

    def periodicity(self, c_prev, c_last, floor=1e-4):
        """Max over points of the extrema shift between two cycles,
        relative to the per-point strain range (floored)."""
        hi_a, lo_a = self.cycle_extrema(c_prev)
        hi_b, lo_b = self.cycle_extrema(c_last)
        rng = np.maximum(hi_b - lo_b, floor)
        rel = np.maximum(np.abs(hi_b - hi_a), np.abs(lo_b - lo_a)) / rng
        return float(np.max(rel))

    def save_npz(self, path):
        np.savez_compressed(path, times=self.times, cycle_index=self.cycle_index,
                            strains=self.strains, element=self.element,
                            station=self.station, fiber=self.fiber,
                            region=self.region, theta=self.theta, z=self.z,
                            region_names=np.array(self.region_names))

    @classmethod
    def load_npz(cls, path):
        with np.load(path, allow_pickle=False) as data:
            return cls(times=data["times"], cycle_index=data["cycle_index"],
                       strains=data["strains"], element=data["element"],
                       station=data["station"], fiber=data["fiber"],
                       region=data["region"], theta=data["theta"], z=data["z"],
                       region_names=tuple(str(s) for s in data["region_names"]))


@dataclass
class BeatResult:
    store: StrainHistoryStore
    positions: np.ndarray      # (samples, nodes, 3)
    lumen_force: np.ndarray    # (samples,)
    ke_ratio: np.ndarray       # (samples,)
    state: object              # final SolverState


def _point_metadata(engine, config):
    """Reference (theta, z) of every fiber point plus frame tags."""
    frame = engine.frame
    n_el = frame.n_elements
    ns = config.stations_per_element
    nf = config.fiber_grid[0] * config.fiber_grid[1]
    from numpy.polynomial.legendre import leggauss
    ps, _ = leggauss(ns)
    xi_s = 0.5 + 0.5 * ps
    a = frame.nodes[frame.elements[:, 0]]
    b = frame.nodes[frame.elements[:, 1]]
    sp = a[:, None, :] + xi_s[None, :, None] * (b - a)[:, None, :]   # (E, S, 3)
    theta = np.arctan2(sp[..., 1], sp[..., 0])
    z = sp[..., 2]
    element = np.repeat(np.arange(n_el), ns * nf)
    station = np.tile(np.repeat(np.arange(ns), nf), n_el)
    fiber = np.tile(np.arange(nf), n_el * ns)
    region = np.repeat(frame.region, ns * nf)
    return (element, station, fiber, region,
            np.repeat(theta.reshape(-1), nf), np.repeat(z.reshape(-1), nf))


def beat_cycles(state, frame, params, lumen: LumenModel, motion, n_cycles,
                config: SolverConfig, implantation_depth,
                samples_per_cycle=100, settle_cycles=0) -> BeatResult:
    """Run pulsatile lumen motion for ``n_cycles`` and record histories.

    ``settle_cycles`` extra periods run first without being recorded, with
    contact friction state carried through, so the recorded cycles start
    from the converged cyclic orbit instead of the static seated state.
    Zero-amplitude motion leaves the state in equilibrium and produces
    constant strain histories.  Raises DriftError when the frame centroid
    wanders by more than a quarter of the stent height.
    """
    if n_cycles < 1:
        raise ValidationError("n_cycles < 1")
    if settle_cycles < 0:
        raise ValidationError("settle_cycles < 0")
    motion = (motion if motion is not None else lumen.motion)
    if motion is None:
        raise ValidationError("no motion profile supplied")
    motion.validate()
    lumen = LumenModel(profile=lumen.profile, penalty=lumen.penalty,
                       friction_mu=lumen.friction_mu, motion=motion,
                       friction_stiffness=lumen.friction_stiffness)
    z_shift = lumen_offset(lumen, implantation_depth)
    contact = LumenContact(lumen, z_shift, motion_active=True,
                           t_start=state.time)
    engine = FrameEngine(frame, params, config, [contact])
    engine.set_state(state)

    dt = config.target_dt
    steps_cycle = int(round(motion.period / dt))
    stride = max(1, steps_cycle // samples_per_cycle)
    n_samples = n_cycles * (steps_cycle // stride)
    n_points = frame.n_elements * config.stations_per_element \
        * config.fiber_grid[0] * config.fiber_grid[1]

    times = np.zeros(n_samples)
    cycles = np.zeros(n_samples, dtype=np.int64)
    strains = np.zeros((n_samples, n_points))
    positions = np.zeros((n_samples, frame.n_nodes, 3))
    lumen_f = np.zeros(n_samples)
    ke_ratio = np.zeros(n_samples)
    centroid0 = state.pos.mean(axis=0)
    height = frame.design.total_height
    k = 0

    for cyc in range(-settle_cycles, n_cycles):
        for i in range(steps_cycle):
            engine.step_once(dt)
            if (i + 1) % stride == 0:
                st = engine.state
                drift = np.linalg.norm(st.pos.mean(axis=0) - centroid0)
                if drift > DRIFT_FRACTION * height:
                    raise DriftError(f"centroid drifted {drift:.2f} mm "
                                     f"at t={st.time:.3f}")
                if cyc >= 0 and k < n_samples:
                    times[k] = st.time
                    cycles[k] = cyc
                    strains[k] = st.fib_strain.reshape(-1)
                    positions[k] = st.pos
                    lumen_f[k] = contact.force_sum
                    ke_ratio[k] = engine.ke_ratio()
                    k += 1

    element, stn, fib, region, theta, z = _point_metadata(engine, config)
    store = StrainHistoryStore(times=times[:k], cycle_index=cycles[:k],
                               strains=strains[:k], element=element,
                               station=stn, fiber=fib, region=region,
                               theta=theta, z=z,
                               region_names=frame.region_names)
    return BeatResult(store=store, positions=positions[:k],
                      lumen_force=lumen_f[:k], ke_ratio=ke_ratio[:k],
                      state=engine.get_state())
