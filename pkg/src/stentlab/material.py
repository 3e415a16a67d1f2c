"""Uniaxial superelastic nitinol fiber law.

Flag-shaped hysteresis driven by a martensite fraction ``xi`` that evolves
linearly in stress across a forward band (austenite -> martensite) and a
reverse band (martensite -> austenite).  The elastic compliance mixes the
austenite and martensite moduli in series,

    1 / E(xi) = (1 - xi) / E_A + xi / E_M,

and full transformation carries a recoverable strain ``eps_L`` whose sign
follows the loading direction.  Transformation stresses shift linearly with
temperature.  Compression transforms at a higher magnitude stress than
tension; the compressive band reuses the tensile band width and the
compressive reverse stresses are the tensile ones scaled by the onset ratio,
so a material with equal onsets responds exactly odd-symmetrically.

The update is strain driven.  On a transformation branch the consistency
condition (stress on the branch line while the strain decomposition holds)
reduces to a quadratic in ``xi`` which is solved in closed form, so the
response is deterministic and needs no iteration.  Between the bands ``xi``
is frozen and the response is elastic at the mixture modulus, which produces
the internal sub-loop behaviour of superelastic wire.
"""
from dataclasses import dataclass, asdict, replace
from functools import lru_cache
import json
import math

import numpy as np

from .errors import ValidationError

# strains beyond this are outside the intended envelope of the law
STRAIN_LIMIT = 0.5
#: fiber strain magnitude above which results should not be trusted
VALIDITY_STRAIN = 0.12


@dataclass(frozen=True)
class MaterialParams:
    """Superelastic parameter set (stresses in MPa, temperatures in degC).

    Defaults reproduce a body-temperature nitinol characterisation used
    throughout the demo designs.
    """

    E_A: float = 24000.0        # austenite Young's modulus
    nu_A: float = 0.33
    E_M: float = 35000.0        # martensite Young's modulus
    nu_M: float = 0.33
    eps_L: float = 0.04         # max transformation strain
    dsig_dT_L: float = 6.527    # loading stress shift per degC
    dsig_dT_U: float = 6.527    # unloading stress shift per degC
    sig_LS: float = 250.0       # forward (loading) start stress, tension
    sig_LE: float = 270.0       # forward end stress, tension
    sig_US: float = 40.0        # reverse (unloading) start stress
    sig_UE: float = 20.0        # reverse end stress
    sig_CLS: float = 900.0      # forward start stress in compression
    eps_VL: float = 0.04        # volumetric-limit strain, kept for completeness
    T0: float = 37.0            # reference temperature

    def validate(self):
        if not (self.E_A > 0.0 and self.E_M > 0.0):
            raise ValidationError("elastic moduli must be positive")
        if not (0.0 < self.eps_L <= 0.12):
            raise ValidationError("eps_L outside (0, 0.12]")
        if not (0.0 < self.sig_LS < self.sig_LE):
            raise ValidationError("need 0 < sig_LS < sig_LE")
        if not (0.0 < self.sig_UE < self.sig_US):
            raise ValidationError("need 0 < sig_UE < sig_US")
        if self.sig_US >= self.sig_LS:
            raise ValidationError("reverse start must sit below forward start")
        if self.sig_CLS < self.sig_LS:
            raise ValidationError("compressive onset below tensile onset")
        return self

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        known = {f: data[f] for f in data if f in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValidationError(f"unknown material fields: {sorted(unknown)}")
        return cls(**known).validate()

    def scaled(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class FiberState:
    """State of one material fiber: total strain, stress, martensite
    fraction and signed transformation strain."""

    strain: float = 0.0
    stress: float = 0.0
    xi: float = 0.0
    eps_tr: float = 0.0

    def validate(self):
        if not (0.0 <= self.xi <= 1.0):
            raise ValidationError("xi outside [0, 1]")
        if abs(self.eps_tr) > self.xi * 0.13:
            raise ValidationError("eps_tr inconsistent with xi")
        return self


@dataclass(frozen=True)
class StressTables:
    """Transformation stresses at a fixed temperature, both senses.

    ``t_*`` are tensile values, ``c_*`` compressive magnitudes; ``fs``/``ff``
    bound the forward band and ``rs``/``rf`` the reverse band.
    """

    E_A: float
    E_M: float
    eps_L: float
    t_fs: float
    t_ff: float
    t_rs: float
    t_rf: float
    c_fs: float
    c_ff: float
    c_rs: float
    c_rf: float


def transformation_stresses(params: MaterialParams, T: float, sense: str = "tension"):
    """Forward/reverse band stresses (start, end, rev start, rev end) at T.

    Compression returns positive magnitudes.  The temperature shift is
    linear with the loading and unloading coefficients respectively.
    """
    dT = T - params.T0
    shift_l = params.dsig_dT_L * dT
    shift_u = params.dsig_dT_U * dT
    width = params.sig_LE - params.sig_LS
    if sense == "tension":
        fs, ff = params.sig_LS, params.sig_LE
        rs, rf = params.sig_US, params.sig_UE
    elif sense == "compression":
        ratio = params.sig_CLS / params.sig_LS
        fs = params.sig_CLS
        ff = params.sig_CLS + width
        rs = params.sig_US * ratio
        rf = params.sig_UE * ratio
    else:
        raise ValidationError(f"unknown sense {sense!r}")
    out = (fs + shift_l, ff + shift_l, rs + shift_u, rf + shift_u)
    if out[3] <= 0.0:
        raise ValidationError("temperature shift drove reverse end stress non-positive")
    return out


@lru_cache(maxsize=32)
def stress_tables(params: MaterialParams, T: float) -> StressTables:
    params.validate()
    t_fs, t_ff, t_rs, t_rf = transformation_stresses(params, T, "tension")
    c_fs, c_ff, c_rs, c_rf = transformation_stresses(params, T, "compression")
    return StressTables(params.E_A, params.E_M, params.eps_L,
                        t_fs, t_ff, t_rs, t_rf, c_fs, c_ff, c_rs, c_rf)


def _branch_root(eps_mirror, p, q, tab):
    """Solve the branch consistency quadratic for xi.

    On a branch the stress is ``p + q*xi`` while the strain decomposition
    gives ``eps = stress * C(xi) + xi * eps_L`` with the series compliance
    ``C(xi) = 1/E_A + xi*(1/E_M - 1/E_A)``.  Eliminating stress yields

        q*d*xi^2 + (q/E_A + p*d + eps_L)*xi + (p/E_A - eps) = 0,

    d = 1/E_M - 1/E_A.  The physical root is returned via the Citardauq
    form, which stays stable as ``q*d`` approaches zero.
    """
    d = 1.0 / tab.E_M - 1.0 / tab.E_A
    a = q * d
    b = q / tab.E_A + p * d + tab.eps_L
    c = p / tab.E_A - eps_mirror
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    return 2.0 * c / (-b - np.sqrt(disc))


def _update_pass(eps, xi, eps_tr, tab):
    compliance = (1.0 - xi) / tab.E_A + xi / tab.E_M
    trial = (eps - eps_tr) / compliance
    side = np.sign(eps_tr)
    side = np.where(side == 0.0, np.sign(trial), side)
    s = np.where(side < 0.0, -1.0, 1.0)

    tension = s > 0.0
    fs = np.where(tension, tab.t_fs, tab.c_fs)
    ff = np.where(tension, tab.t_ff, tab.c_ff)
    rs = np.where(tension, tab.t_rs, tab.c_rs)
    rf = np.where(tension, tab.t_rf, tab.c_rf)

    eps_m = s * eps
    trial_m = s * trial
    fwd = (trial_m > fs + xi * (ff - fs)) & (xi < 1.0)
    rev = (trial_m < rf + xi * (rs - rf)) & (xi > 0.0)

    xi_f = np.clip(_branch_root(eps_m, fs, ff - fs, tab), xi, 1.0)
    xi_r = np.clip(_branch_root(eps_m, rf, rs - rf, tab), 0.0, xi)
    xi_new = np.where(fwd, xi_f, np.where(rev, xi_r, xi))

    eps_tr_new = s * xi_new * tab.eps_L
    c_new = (1.0 - xi_new) / tab.E_A + xi_new / tab.E_M
    stress = (eps - eps_tr_new) / c_new
    return stress, xi_new, eps_tr_new


def superelastic_update(eps_new, xi, eps_tr, tab: StressTables):
    """Vectorised strain-driven update; returns (stress, xi, eps_tr).

    Runs the branch resolution twice so a single large increment that
    finishes the reverse transformation and then crosses the opposite
    forward onset lands on the correct branch.  The second pass is a no-op
    for states already consistent.
    """
    eps_new = np.asarray(eps_new, dtype=float)
    stress, xi1, tr1 = _update_pass(eps_new, np.asarray(xi, dtype=float),
                                    np.asarray(eps_tr, dtype=float), tab)
    return _update_pass(eps_new, xi1, tr1, tab)


def fiber_update(state: FiberState, strain_new: float, params: MaterialParams,
                 T: float | None = None) -> FiberState:
    """Advance a single fiber to a new total strain.

    Raises ValidationError for non-finite input or strain magnitude beyond
    the supported envelope.
    """
    if not math.isfinite(strain_new):
        raise ValidationError("strain must be finite")
    if abs(strain_new) > STRAIN_LIMIT:
        raise ValidationError(f"|strain| > {STRAIN_LIMIT} outside supported range")
    tab = stress_tables(params, params.T0 if T is None else T)
    stress, xi, eps_tr = superelastic_update(strain_new, state.xi, state.eps_tr, tab)
    return FiberState(strain=float(strain_new), stress=float(stress),
                      xi=float(xi), eps_tr=float(eps_tr))


def tangent_array(stress, xi, eps_tr, tab: StressTables):
    """Vectorised tangent modulus for fiber state arrays (see fiber_tangent)."""
    stress = np.asarray(stress, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eps_tr = np.asarray(eps_tr, dtype=float)
    mixture = 1.0 / ((1.0 - xi) / tab.E_A + xi / tab.E_M)
    side = np.sign(eps_tr)
    side = np.where((side == 0.0) & (xi == 0.0), np.sign(stress), side)
    tension = side >= 0.0
    fs = np.where(tension, tab.t_fs, tab.c_fs)
    ff = np.where(tension, tab.t_ff, tab.c_ff)
    rs = np.where(tension, tab.t_rs, tab.c_rs)
    rf = np.where(tension, tab.t_rf, tab.c_rf)
    sig_m = np.abs(stress)
    tol = 1e-6 * tab.E_A
    on_fwd = (xi < 1.0) & (np.abs(sig_m - (fs + xi * (ff - fs))) <= tol) & (side != 0.0)
    on_rev = (xi > 0.0) & (np.abs(sig_m - (rf + xi * (rs - rf))) <= tol)
    out = np.where(on_fwd, (ff - fs) / tab.eps_L,
                   np.where(on_rev, (rs - rf) / tab.eps_L, mixture))
    return out


def fiber_tangent(state: FiberState, params: MaterialParams,
                  T: float | None = None) -> float:
    """Current tangent modulus dsig/deps (MPa).

    Mixture modulus off the bands; the band hardening slope
    (end - start) / eps_L while the state sits on an active band.
    """
    tab = stress_tables(params, params.T0 if T is None else T)
    mixture = 1.0 / ((1.0 - state.xi) / tab.E_A + state.xi / tab.E_M)
    side = np.sign(state.eps_tr)
    if side == 0.0 and state.xi == 0.0:
        side = np.sign(state.stress)
    if side == 0.0:
        return mixture
    if side > 0.0:
        fs, ff, rs, rf = tab.t_fs, tab.t_ff, tab.t_rs, tab.t_rf
    else:
        fs, ff, rs, rf = tab.c_fs, tab.c_ff, tab.c_rs, tab.c_rf
    sig_m = abs(state.stress)
    tol = 1e-6 * tab.E_A
    if state.xi < 1.0 and abs(sig_m - (fs + state.xi * (ff - fs))) <= tol:
        return (ff - fs) / tab.eps_L
    if state.xi > 0.0 and abs(sig_m - (rf + state.xi * (rs - rf))) <= tol:
        return (rs - rf) / tab.eps_L
    return mixture
