"""Parametric diamond-cell stent frames.

A design is a cylinder of ``n_cells`` diamond cells around by ``n_rows``
cell rows along the axis.  Node rings alternate between apex rings (cell
tips, at multiples of the cell pitch) and mid rings (cell waists, offset by
half a pitch), so a frame with ``n_rows`` rows carries ``2*n_rows + 1``
rings of ``n_cells`` nodes plus the strut subdivision nodes.  Struts run
between consecutive rings; each spans half a cell pitch circumferentially
and half a row height axially and is meshed as straight beam segments whose
nodes sit on the local cylinder surface.

Axial convention: z = 0 is the inflow end, z grows toward outflow.  Region
bands label elements by normalised axial position of their midpoint.
"""
from dataclasses import dataclass, field, replace
import json
import math

import numpy as np

from .errors import ValidationError

THICKNESS_RANGE = (0.1, 0.5)  # plausible laser-cut wall thickness, mm


@dataclass(frozen=True)
class StentDesign:
    """Parametric description of a diamond-cell frame.

    ``ring_diameters`` (outer diameter at the node centerline, mm) may be
    given per apex ring (``n_rows + 1`` values, mid rings interpolated
    axially) or per ring (``2*n_rows + 1`` values).  ``thickness_profile``
    is a list of ``[start, end, thickness]`` bands over the circumferential
    fraction [0, 1).  ``region_bands`` maps region names to normalised
    axial intervals partitioning [0, 1].
    """

    name: str
    n_cells: int
    n_rows: int
    ring_diameters: tuple
    row_heights: tuple
    strut_width: float
    thickness_profile: tuple
    region_bands: tuple = (("annulus", 0.0, 0.3), ("waist", 0.3, 0.7),
                           ("crown", 0.7, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "ring_diameters", tuple(float(d) for d in self.ring_diameters))
        object.__setattr__(self, "row_heights", tuple(float(h) for h in self.row_heights))
        object.__setattr__(self, "thickness_profile",
                           tuple((float(a), float(b), float(t)) for a, b, t in self.thickness_profile))
        bands = []
        for item in self.region_bands:
            if len(item) == 2:  # ("name", (lo, hi)) form
                nm, (lo, hi) = item
            else:
                nm, lo, hi = item
            bands.append((str(nm), float(lo), float(hi)))
        object.__setattr__(self, "region_bands", tuple(bands))

    def validate(self):
        if self.n_cells < 3:
            raise ValidationError("n_cells < 3")
        if self.n_rows < 1:
            raise ValidationError("n_rows < 1")
        n_rings = 2 * self.n_rows + 1
        if len(self.ring_diameters) not in (self.n_rows + 1, n_rings):
            raise ValidationError("ring_diameters must list apex rings or all rings")
        if min(self.ring_diameters) <= 0.0:
            raise ValidationError("non-positive ring diameter")
        if len(self.row_heights) != self.n_rows:
            raise ValidationError("row_heights length != n_rows")
        if min(self.row_heights) <= 0.0:
            raise ValidationError("non-positive row height")
        if self.strut_width <= 0.0:
            raise ValidationError("non-positive strut width")
        lo, hi = THICKNESS_RANGE
        if not self.thickness_profile:
            raise ValidationError("empty thickness profile")
        cursor = 0.0
        for a, b, t in self.thickness_profile:
            if abs(a - cursor) > 1e-12 or b <= a:
                raise ValidationError("thickness bands must partition [0, 1)")
            if not (lo <= t <= hi):
                raise ValidationError(f"thickness {t} outside plausible {THICKNESS_RANGE}")
            cursor = b
        if abs(cursor - 1.0) > 1e-12:
            raise ValidationError("thickness bands must end at 1")
        cursor = 0.0
        for nm, a, b in self.region_bands:
            if abs(a - cursor) > 1e-12 or b <= a:
                raise ValidationError("region bands must partition [0, 1]")
            cursor = b
        if abs(cursor - 1.0) > 1e-12:
            raise ValidationError("region bands must end at 1")
        return self

    @property
    def total_height(self):
        return float(sum(self.row_heights))

    def strut_length(self, row: int) -> float:
        """Unrolled centerline length of a strut in cell row ``row``."""
        half_pitch = math.pi * self.ring_diameters[0] / (2 * self.n_cells)
        return math.hypot(half_pitch, self.row_heights[row] / 2.0)


def scale_strut_width(design: StentDesign, factor: float) -> StentDesign:
    """Return a copy with the strut width scaled.

    The name gains an ``-<pct>I`` (increase) or ``-<pct>D`` (decrease)
    suffix, e.g. factor 1.2 -> ``-20I``.
    """
    if factor <= 0.0:
        raise ValidationError("width scale factor must be positive")
    pct = int(round(abs(factor - 1.0) * 100.0))
    suffix = f"-{pct}{'D' if factor < 1.0 else 'I'}"
    return replace(design, name=design.name + suffix,
                   strut_width=design.strut_width * factor)


def _thickness_at(profile, frac):
    for a, b, t in profile:
        if a <= frac < b:
            return t
    return profile[-1][2]  # frac == 1.0 lands in the last band


def _region_at(bands, frac):
    for idx, (_, a, b) in enumerate(bands):
        if a <= frac < b:
            return idx
    return len(bands) - 1


@dataclass(frozen=True)
class Section:
    """Rectangular strut cross-section: width in the surface, thickness
    through the wall."""

    width: float
    thickness: float
    fiber_grid: tuple = (2, 2)

    @property
    def area(self):
        return self.width * self.thickness

    @property
    def I_surface(self):
        """Second moment about the in-surface axis (bending through wall)."""
        return self.width * self.thickness ** 3 / 12.0

    @property
    def I_wall(self):
        """Second moment about the wall normal (in-surface scissor bending)."""
        return self.thickness * self.width ** 3 / 12.0

    @property
    def torsion_J(self):
        a = max(self.width, self.thickness) / 2.0
        b = min(self.width, self.thickness) / 2.0
        return a * b ** 3 * (16.0 / 3.0 - 3.36 * (b / a) * (1.0 - b ** 4 / (12.0 * a ** 4)))


@dataclass
class Frame:
    """Assembled beam lattice.

    ``nodes`` holds reference positions (mm).  ``elements`` is an (E, 2)
    array of node ids; per-element arrays give section id, region code and
    the parent strut id.  ``node_ring`` is the ring level for lattice nodes
    and -1 for subdivision nodes.
    """

    nodes: np.ndarray
    elements: np.ndarray
    sections: list
    section_id: np.ndarray
    region: np.ndarray
    region_names: tuple
    strut_id: np.ndarray
    node_ring: np.ndarray
    design: StentDesign
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    def element_midpoints(self):
        return 0.5 * (self.nodes[self.elements[:, 0]] + self.nodes[self.elements[:, 1]])

    def element_lengths(self):
        d = self.nodes[self.elements[:, 1]] - self.nodes[self.elements[:, 0]]
        return np.linalg.norm(d, axis=1)

    def ring_radii(self, level):
        sel = self.node_ring == level
        return np.hypot(self.nodes[sel, 0], self.nodes[sel, 1])

    def region_nodes(self, name):
        """Sorted ids of all nodes touched by elements of a named region."""
        if name not in self.region_names:
            raise ValidationError(f"unknown region {name!r}")
        code = self.region_names.index(name)
        return np.unique(self.elements[self.region == code])

    def validate(self):
        if self.elements.min() < 0 or self.elements.max() >= self.n_nodes:
            raise ValidationError("element refers to missing node")
        if np.any(self.element_lengths() <= 0.0):
            raise ValidationError("degenerate element")
        # single connected component
        parent = np.arange(self.n_nodes)

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in self.elements:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        roots = {find(i) for i in range(self.n_nodes)}
        if len(roots) != 1:
            raise ValidationError("frame is not a single connected component")
        return self


def build_stent(design: StentDesign, elements_per_strut: int = 4,
                fiber_grid=(2, 2)) -> Frame:
    """Mesh a design into a beam frame.

    Every strut becomes ``elements_per_strut`` straight segments whose
    nodes lie on the linearly interpolated local cylinder, so unrolled
    strut lengths are preserved exactly for uniform-diameter designs.
    """
    design.validate()
    if elements_per_strut < 1:
        raise ValidationError("elements_per_strut < 1")
    n_c, n_r = design.n_cells, design.n_rows
    n_levels = 2 * n_r + 1
    dtheta = 2.0 * math.pi / n_c

    z_levels = np.zeros(n_levels)
    for k in range(n_r):
        z_levels[2 * k + 1] = z_levels[2 * k] + design.row_heights[k] / 2.0
        z_levels[2 * k + 2] = z_levels[2 * k] + design.row_heights[k]
    if len(design.ring_diameters) == n_levels:
        radii = np.asarray(design.ring_diameters) / 2.0
    else:
        apex_z = z_levels[0::2]
        radii = np.interp(z_levels, apex_z, np.asarray(design.ring_diameters) / 2.0)

    # lattice nodes; mid rings sit half a pitch over
    theta_lat = np.empty((n_levels, n_c))
    for lev in range(n_levels):
        off = 0.5 * dtheta if lev % 2 else 0.0
        theta_lat[lev] = np.arange(n_c) * dtheta + off
    nodes = []
    node_ring = []
    for lev in range(n_levels):
        for i in range(n_c):
            th = theta_lat[lev, i]
            nodes.append((radii[lev] * math.cos(th), radii[lev] * math.sin(th), z_levels[lev]))
            node_ring.append(lev)

    def lat_id(lev, i):
        return lev * n_c + (i % n_c)

    # struts as (level_a, theta_a, level_b, theta_b) with continuous theta
    struts = []
    for k in range(n_r):
        lo, mid, hi = 2 * k, 2 * k + 1, 2 * k + 2
        for i in range(n_c):
            th = i * dtheta
            struts.append((lat_id(lo, i), th, lat_id(mid, i), th + 0.5 * dtheta, mid))
            struts.append((lat_id(lo, i), th, lat_id(mid, i - 1), th - 0.5 * dtheta, mid))
            thm = (i + 0.5) * dtheta
            struts.append((lat_id(mid, i), thm, lat_id(hi, i), thm - 0.5 * dtheta, hi))
            struts.append((lat_id(mid, i), thm, lat_id(hi, i + 1), thm + 0.5 * dtheta, hi))

    total_h = design.total_height
    elem_nodes = []
    elem_strut = []
    for s_id, (na, tha, nb, thb, lev_b) in enumerate(struts):
        za, zb = nodes[na][2], nodes[nb][2]
        ra = math.hypot(nodes[na][0], nodes[na][1])
        rb = math.hypot(nodes[nb][0], nodes[nb][1])
        chain = [na]
        for j in range(1, elements_per_strut):
            s = j / elements_per_strut
            th = tha + (thb - tha) * s
            r = ra + (rb - ra) * s
            z = za + (zb - za) * s
            nodes.append((r * math.cos(th), r * math.sin(th), z))
            node_ring.append(-1)
            chain.append(len(nodes) - 1)
        chain.append(nb)
        for a, b in zip(chain[:-1], chain[1:]):
            elem_nodes.append((a, b))
            elem_strut.append(s_id)

    nodes = np.asarray(nodes, dtype=float)
    elements = np.asarray(elem_nodes, dtype=np.int64)
    strut_id = np.asarray(elem_strut, dtype=np.int64)

    mid = 0.5 * (nodes[elements[:, 0]] + nodes[elements[:, 1]])
    frac_theta = (np.arctan2(mid[:, 1], mid[:, 0]) % (2.0 * math.pi)) / (2.0 * math.pi)
    frac_z = mid[:, 2] / total_h

    sections = []
    sec_key = {}
    section_id = np.empty(len(elements), dtype=np.int64)
    region = np.empty(len(elements), dtype=np.int64)
    for e in range(len(elements)):
        t = _thickness_at(design.thickness_profile, frac_theta[e])
        key = (design.strut_width, t)
        if key not in sec_key:
            sec_key[key] = len(sections)
            sections.append(Section(design.strut_width, t, tuple(fiber_grid)))
        section_id[e] = sec_key[key]
        region[e] = _region_at(design.region_bands, frac_z[e])

    frame = Frame(nodes=nodes, elements=elements, sections=sections,
                  section_id=section_id, region=region,
                  region_names=tuple(nm for nm, _, _ in design.region_bands),
                  strut_id=strut_id, node_ring=np.asarray(node_ring, dtype=np.int64),
                  design=design)
    return frame.validate()


def assign_thickness(frame: Frame, profile) -> Frame:
    """Re-derive element sections from a circumferential thickness profile."""
    profile = tuple((float(a), float(b), float(t)) for a, b, t in profile)
    design = replace(frame.design, thickness_profile=profile)
    design.validate()
    mid = frame.element_midpoints()
    frac = (np.arctan2(mid[:, 1], mid[:, 0]) % (2.0 * math.pi)) / (2.0 * math.pi)
    sections = []
    sec_key = {}
    section_id = np.empty(frame.n_elements, dtype=np.int64)
    grid = frame.sections[0].fiber_grid if frame.sections else (2, 2)
    for e in range(frame.n_elements):
        t = _thickness_at(profile, frac[e])
        key = (design.strut_width, t)
        if key not in sec_key:
            sec_key[key] = len(sections)
            sections.append(Section(design.strut_width, t, grid))
        section_id[e] = sec_key[key]
    return Frame(nodes=frame.nodes, elements=frame.elements, sections=sections,
                 section_id=section_id, region=frame.region,
                 region_names=frame.region_names, strut_id=frame.strut_id,
                 node_ring=frame.node_ring, design=design, axis=frame.axis)


def save_design(design: StentDesign, path):
    data = {
        "name": design.name,
        "n_cells": design.n_cells,
        "n_rows": design.n_rows,
        "ring_diameters": list(design.ring_diameters),
        "row_heights": list(design.row_heights),
        "strut_width": design.strut_width,
        "thickness_profile": [list(band) for band in design.thickness_profile],
        "region_bands": {nm: [a, b] for nm, a, b in design.region_bands},
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_design(path) -> StentDesign:
    with open(path) as fh:
        data = json.load(fh)
    try:
        bands = data.get("region_bands")
        if isinstance(bands, dict):
            bands = sorted(((nm, a, b) for nm, (a, b) in bands.items()),
                           key=lambda item: item[1])
        design = StentDesign(
            name=data["name"], n_cells=int(data["n_cells"]), n_rows=int(data["n_rows"]),
            ring_diameters=data["ring_diameters"], row_heights=data["row_heights"],
            strut_width=float(data["strut_width"]),
            thickness_profile=data["thickness_profile"],
            **({"region_bands": bands} if bands else {}))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed design file {path}: {exc}") from exc
    return design.validate()
