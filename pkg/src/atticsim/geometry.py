"""Tessellation of the attic scene into a triangle soup for ray casting.

Each triangle carries a surface id so renders can color by surface and
tests can attribute hits.  Winding is not meaningful; rays hit both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import AtticScene, Fixture, Joist

CIRCLE_SEGMENTS = 32

# base colors per surface kind, RGB in [0, 255]
SURFACE_COLORS = {
    "drywall": (200, 196, 188),
    "joist": (156, 116, 72),
    "wall": (170, 160, 150),
    "roof": (120, 110, 100),
    "light_fixture": (230, 220, 140),
    "fan_duct": (150, 160, 175),
    "junction_box": (110, 120, 130),
    "conduit": (185, 185, 190),
    "chimney": (140, 80, 70),
    "tag": (255, 255, 255),
}


@dataclass
class TriangleMesh:
    vertices: np.ndarray      # (M, 3, 3) float64, triangle corner coordinates
    surface_kind: list[str]   # per-surface kind name
    surface_of_tri: np.ndarray  # (M,) int32 index into surface_kind
    colors: np.ndarray        # (M, 3) uint8 per-triangle base color

    @property
    def n_triangles(self) -> int:
        return len(self.vertices)


def _quad(p0, p1, p2, p3):
    return [(p0, p1, p2), (p0, p2, p3)]


def _rect_xy(cx, cy, w, h, z, yaw=0.0):
    c, s = math.cos(yaw), math.sin(yaw)
    corners = []
    for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        x = sx * w / 2.0
        y = sy * h / 2.0
        corners.append((cx + c * x - s * y, cy + s * x + c * y, z))
    return _quad(*corners)


def _box(corner_min, corner_max):
    x0, y0, z0 = corner_min
    x1, y1, z1 = corner_max
    v = [(x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
         (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)]
    faces = [(0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4),
             (2, 3, 7, 6), (1, 2, 6, 5), (3, 0, 4, 7)]
    tris = []
    for a, b, c, d in faces:
        tris.extend(_quad(v[a], v[b], v[c], v[d]))
    return tris


def _oriented_box(joist: Joist, z0: float, z1: float):
    """Box for a joist strip running along its direction."""
    dx, dy = joist.direction
    nx, ny = -dy, dx
    hw = joist.width / 2.0
    ox, oy = joist.origin
    ex, ey = ox + dx * joist.length, oy + dy * joist.length
    base = [(ox + nx * hw, oy + ny * hw), (ox - nx * hw, oy - ny * hw),
            (ex - nx * hw, ey - ny * hw), (ex + nx * hw, ey + ny * hw)]
    lo = [(x, y, z0) for x, y in base]
    hi = [(x, y, z1) for x, y in base]
    tris = _quad(*hi)  # top
    for i in range(4):  # sides
        j = (i + 1) % 4
        tris.extend(_quad(lo[i], lo[j], hi[j], hi[i]))
    return tris


def _disc(center, radius, z, segments=CIRCLE_SEGMENTS):
    cx, cy = center
    tris = []
    angles = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    for a0, a1 in zip(angles, angles[1:]):
        tris.append((
            (cx, cy, z),
            (cx + radius * math.cos(a0), cy + radius * math.sin(a0), z),
            (cx + radius * math.cos(a1), cy + radius * math.sin(a1), z),
        ))
    return tris


def _cylinder(center, radius, z0, z1, segments=16):
    cx, cy = center
    tris = _disc(center, radius, z1, segments)
    angles = np.linspace(0.0, 2.0 * math.pi, segments + 1)
    for a0, a1 in zip(angles, angles[1:]):
        p00 = (cx + radius * math.cos(a0), cy + radius * math.sin(a0), z0)
        p10 = (cx + radius * math.cos(a1), cy + radius * math.sin(a1), z0)
        p01 = (cx + radius * math.cos(a0), cy + radius * math.sin(a0), z1)
        p11 = (cx + radius * math.cos(a1), cy + radius * math.sin(a1), z1)
        tris.extend(_quad(p00, p10, p11, p01))
    return tris


def _fixture_triangles(f: Fixture):
    x, y, z = f.position
    shape = f.shape
    kind = shape["type"]
    if kind == "circle":
        return _disc((x, y), shape["radius"], z)
    if kind == "rectangle":
        return _rect_xy(x, y, shape["w"], shape["h"], z, f.yaw)
    if kind == "cylinder":
        height = shape.get("height", 0.3)
        return _cylinder((x, y), shape["radius"], z, z + height)
    raise ValueError(f"unknown fixture shape {kind!r}")


def build_mesh(scene: AtticScene, tag_size: float = 0.10) -> TriangleMesh:
    vertices: list = []
    kinds: list[str] = []
    surface_of_tri: list[int] = []

    def add(tris, kind):
        kinds.append(kind)
        sid = len(kinds) - 1
        vertices.extend(tris)
        surface_of_tri.extend([sid] * len(tris))

    half_x, half_y = scene.footprint[0] / 2.0, scene.footprint[1] / 2.0
    z_floor = scene.drywall_level
    z_roof = scene.roof_height

    add(_rect_xy(0.0, 0.0, scene.footprint[0], scene.footprint[1], z_floor),
        "drywall")
    add(_rect_xy(0.0, 0.0, scene.footprint[0], scene.footprint[1], z_roof),
        "roof")
    walls = []
    for sx in (-1, 1):
        walls.extend(_quad((sx * half_x, -half_y, z_floor), (sx * half_x, half_y, z_floor),
                           (sx * half_x, half_y, z_roof), (sx * half_x, -half_y, z_roof)))
        walls.extend(_quad((-half_x, sx * half_y, z_floor), (half_x, sx * half_y, z_floor),
                           (half_x, sx * half_y, z_roof), (-half_x, sx * half_y, z_roof)))
    add(walls, "wall")

    for j in scene.joists:
        add(_oriented_box(j, z_floor, z_floor + j.top_height), "joist")
    for f in scene.fixtures:
        add(_fixture_triangles(f), f.kind)
    for t in scene.tags:
        # tags rendered as small vertical squares facing their yaw direction
        c, s = math.cos(t.yaw), math.sin(t.yaw)
        nx, ny = -s, c
        x, y, z = t.position
        h = tag_size / 2.0
        add(_quad((x - nx * h, y - ny * h, z - h), (x + nx * h, y + ny * h, z - h),
                  (x + nx * h, y + ny * h, z + h), (x - nx * h, y - ny * h, z + h)),
            "tag")

    verts = np.asarray(vertices, dtype=np.float64)
    sids = np.asarray(surface_of_tri, dtype=np.int32)
    colors = np.array([SURFACE_COLORS.get(kinds[s], (128, 128, 128)) for s in sids],
                      dtype=np.uint8)
    return TriangleMesh(vertices=verts, surface_kind=kinds,
                        surface_of_tri=sids, colors=colors)
