"""Triangulations of the benchmark domains and uniform (red) refinement.

A :class:`Triangulation` stores vertices and counterclockwise triangles and
derives the edge structure once at construction.  Local edge ``i`` of a
triangle is the edge opposite its local vertex ``i``.

Interior edges are oriented with the convention used throughout the package:
``edge_tris[e, 0]`` is the adjacent triangle with the *larger* index and
``edge_tris[e, 1]`` the one with the smaller index; the edge normal points
from the first to the second.  Boundary edges have ``edge_tris[e, 1] == -1``
and an outward normal.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

DOMAIN_KINDS = ("unit-square", "perturbed-square", "equilateral-triangle", "l-shape")

SQRT3 = np.sqrt(3.0)


class MeshError(ValueError):
    """Invalid mesh input or unknown domain."""


class GeometryError(MeshError):
    """Degenerate element geometry."""


class Triangulation:
    """Immutable 2-D triangulation with derived edge data.

    Parameters
    ----------
    vertices : (nv, 2) array
    triangles : (nt, 3) int array, counterclockwise
    edge_tags : dict mapping sorted vertex pair -> boundary segment label
        Labels for boundary edges.  Every boundary edge must be labeled.
    level : int
    parent : (nt,) int array or None
        Parent triangle index in the previous level.
    """

    def __init__(self, vertices, triangles, edge_tags, level=1, parent=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.level = int(level)
        self.parent = None if parent is None else np.asarray(parent, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if self.level < 1:
            raise MeshError("level must be >= 1")

        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        self.areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.any(self.areas <= 0.0):
            raise GeometryError("triangles must be counterclockwise and nondegenerate")

        t = self.triangles
        local = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1)
        pairs = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        self.edges = edges
        self.tri_edges = inverse.reshape(-1, 3)

        ne = len(edges)
        counts = np.bincount(self.tri_edges.ravel(), minlength=ne)
        if np.any(counts > 2):
            raise MeshError("edge shared by more than two triangles")
        # larger triangle index first
        owner = np.repeat(np.arange(len(t)), 3)
        flat = self.tri_edges.ravel()
        first = np.full(ne, -1, dtype=np.int64)
        second = np.full(ne, -1, dtype=np.int64)
        np.maximum.at(first, flat, owner)
        other = np.where(owner != first[flat], owner, -1)
        np.maximum.at(second, flat, other)
        self.edge_tris = np.stack([first, second], axis=1)
        self.boundary_edges = second < 0

        tags = np.full(ne, "", dtype=object)
        for e in np.flatnonzero(self.boundary_edges):
            key = (int(edges[e, 0]), int(edges[e, 1]))
            if key not in edge_tags:
                raise MeshError(f"boundary edge {key} has no segment label")
            tags[e] = edge_tags[key]
        self.edge_tags = tags

    # basic counts
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def h(self):
        """Largest edge length."""
        v = self.vertices[self.edges]
        return float(np.max(np.linalg.norm(v[:, 1] - v[:, 0], axis=1)))

    @property
    def midpoints(self):
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])

    @property
    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def edge_tag_map(self):
        """Boundary labels keyed by sorted vertex pair."""
        return {
            (int(a), int(b)): str(tag)
            for (a, b), tag, bd in zip(self.edges, self.edge_tags, self.boundary_edges)
            if bd
        }

    def segment_labels(self):
        return sorted({str(s) for s in self.edge_tags[self.boundary_edges]})

    def edge_signs(self):
        """(nt, 3) array: +1 where the global edge normal is outward for the triangle."""
        owner = self.edge_tris[self.tri_edges, 0]
        return np.where(owner == np.arange(self.n_triangles)[:, None], 1.0, -1.0)

    def __repr__(self):
        return (f"Triangulation(level={self.level}, vertices={self.n_vertices}, "
                f"triangles={self.n_triangles}, edges={self.n_edges})")


@dataclass(frozen=True)
class ElementGeometry:
    """Geometric quantities of one triangle.

    ``edge_lengths[i]``, ``heights[i]`` and ``normals[i]`` refer to the edge
    opposite vertex ``i``.  With vertices ``(x_i, y_i)``, ``H`` is the sum of
    the squared edge lengths, ``A`` the sum over the three edges of
    ``dx**2 - dy**2`` and ``B = sum_i (2 x_i y_i - sum_{j != i} x_i y_j)``.
    """

    vertices: np.ndarray
    centroid: np.ndarray
    area: float
    edge_lengths: np.ndarray
    heights: np.ndarray
    normals: np.ndarray
    H: float
    A: float
    B: float


@dataclass(frozen=True)
class DomainSpec:
    """A benchmark domain: its kind and how boundary edges are labeled."""

    kind: str

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise MeshError(f"unknown domain kind {self.kind!r}; expected one of {DOMAIN_KINDS}")

    @property
    def segments(self):
        return _SEGMENTS[self.kind]

    def label(self, a, b):
        """Segment label for a boundary edge with endpoints ``a`` and ``b``."""
        return _LABELERS[self.kind](np.asarray(a, float), np.asarray(b, float))


# ---------------------------------------------------------------------------
# level-1 meshes

def _square_labeler(a, b):
    tol = 1e-12
    if abs(a[0]) < tol and abs(b[0]) < tol:
        return "left"
    if abs(a[0] - 1) < tol and abs(b[0] - 1) < tol:
        return "right"
    if abs(a[1]) < tol and abs(b[1]) < tol:
        return "bottom"
    if abs(a[1] - 1) < tol and abs(b[1] - 1) < tol:
        return "top"
    raise MeshError(f"edge {a}-{b} is not on the unit square boundary")


def _triangle_labeler(a, b):
    tol = 1e-12
    m = 0.5 * (a + b)
    if abs(m[0] - 1.0) < tol:
        return "gamma3"
    if abs(m[1] - SQRT3 * m[0]) < tol:
        return "gamma1"
    if abs(m[1] - SQRT3 * (1.0 - m[0])) < tol:
        return "gamma2"
    raise MeshError(f"edge {a}-{b} is not on the triangle boundary")


def _lshape_labeler(a, b):
    return "wall"


_LABELERS = {
    "unit-square": _square_labeler,
    "perturbed-square": _square_labeler,
    "equilateral-triangle": _triangle_labeler,
    "l-shape": _lshape_labeler,
}

_SEGMENTS = {
    "unit-square": ("bottom", "left", "right", "top"),
    "perturbed-square": ("bottom", "left", "right", "top"),
    "equilateral-triangle": ("gamma1", "gamma2", "gamma3"),
    "l-shape": ("wall",),
}


def _coarse(kind):
    if kind == "unit-square":
        p = [(0, 0), (1, 0), (1, 1), (0, 1)]
        t = [(0, 1, 2), (0, 2, 3)]
    elif kind == "perturbed-square":
        p = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0.9), (0.05, 0), (0.9, 1)]
        t = [(0, 5, 4), (5, 6, 4), (4, 6, 3), (5, 1, 6), (1, 2, 6)]
    elif kind == "equilateral-triangle":
        # apex (1/2, sqrt3/2), Neumann side on x1 = 1; red-refined once
        p = [(0.5, SQRT3 / 2), (1.0, 0.0), (1.0, SQRT3),
             (1.0, SQRT3 / 2), (0.75, 3 * SQRT3 / 4), (0.75, SQRT3 / 4)]
        t = [(0, 5, 4), (5, 1, 3), (4, 3, 2), (3, 4, 5)]
    elif kind == "l-shape":
        p = [(-1, -1), (0, -1), (-1, 0), (0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
        t = [(0, 1, 3), (0, 3, 2), (2, 3, 6), (2, 6, 5), (3, 4, 7), (3, 7, 6)]
    else:
        raise MeshError(f"unknown domain kind {kind!r}")
    return np.array(p, dtype=float), np.array(t, dtype=np.int64)


def build_domain(spec, level=1):
    """Level-``level`` mesh of a benchmark domain.

    Parameters
    ----------
    spec : DomainSpec or str
        Domain kind, one of ``DOMAIN_KINDS``.
    level : int
        Level 1 is the coarse mesh; each further level is one uniform refinement.

    Returns
    -------
    Triangulation
    """
    if isinstance(spec, str):
        spec = DomainSpec(spec)
    level = int(level)
    if level < 1:
        raise MeshError("level must be >= 1")
    p, t = _coarse(spec.kind)
    pairs = np.unique(np.sort(np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]]), axis=1), axis=0)
    counts = {}
    for tri in t:
        for a, b in ((tri[1], tri[2]), (tri[2], tri[0]), (tri[0], tri[1])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    tags = {
        (int(a), int(b)): spec.label(p[a], p[b])
        for a, b in pairs
        if counts[(a, b)] == 1
    }
    mesh = Triangulation(p, t, tags, level=1)
    for _ in range(level - 1):
        mesh = uniform_refine(mesh)
    return mesh


def uniform_refine(t):
    """Split every triangle into four congruent children through edge midpoints.

    New vertex ``nv + e`` is the midpoint of edge ``e``.  Children of triangle
    ``k`` are ``4k .. 4k+3``: the corner children at local vertices 0, 1, 2
    followed by the middle child.
    """
    nv = t.n_vertices
    verts = np.vstack([t.vertices, t.midpoints])
    tri = t.triangles
    m = nv + t.tri_edges  # m[:, i] is the midpoint opposite vertex i
    children = np.stack([
        np.stack([tri[:, 0], m[:, 2], m[:, 1]], axis=1),
        np.stack([m[:, 2], tri[:, 1], m[:, 0]], axis=1),
        np.stack([m[:, 1], m[:, 0], tri[:, 2]], axis=1),
        np.stack([m[:, 0], m[:, 1], m[:, 2]], axis=1),
    ], axis=1).reshape(-1, 3)
    parent = np.repeat(np.arange(t.n_triangles), 4)

    tags = {}
    for e in np.flatnonzero(t.boundary_edges):
        a, b = t.edges[e]
        mid = nv + e
        label = t.edge_tags[e]
        tags[(int(min(a, mid)), int(max(a, mid)))] = label
        tags[(int(min(b, mid)), int(max(b, mid)))] = label
    return Triangulation(verts, children, tags, level=t.level + 1, parent=parent)


# ---------------------------------------------------------------------------
# geometry

def geometry_arrays(t):
    """Per-element geometry for all triangles at once.

    Returns a dict of arrays: ``centroid`` (nt, 2), ``area`` (nt,),
    ``edge_lengths``, ``heights`` (nt, 3), ``normals`` (nt, 3, 2),
    ``H``, ``A``, ``B`` (nt,).
    """
    p = t.vertices[t.triangles]
    return _geometry(p, t.areas)


def _geometry(p, area):
    nxt = p[:, [1, 2, 0]]
    prv = p[:, [2, 0, 1]]
    tangent = prv - nxt  # edge i runs from vertex i+1 to vertex i+2
    lengths = np.linalg.norm(tangent, axis=2)
    normals = np.stack([tangent[..., 1], -tangent[..., 0]], axis=2) / lengths[..., None]
    heights = 2.0 * area[:, None] / lengths
    H = np.sum(lengths**2, axis=1)
    A = np.zeros(len(p))
    B = np.zeros(len(p))
    for i in range(3):
        B += 2.0 * p[:, i, 0] * p[:, i, 1]
        for j in range(3):
            if i == j:
                continue
            B -= p[:, i, 0] * p[:, j, 1]
            if j > i:
                # one term per edge
                A += (p[:, i, 0] - p[:, j, 0]) ** 2 - (p[:, i, 1] - p[:, j, 1]) ** 2
    return {
        "centroid": p.mean(axis=1),
        "area": area,
        "edge_lengths": lengths,
        "heights": heights,
        "normals": normals,
        "H": H,
        "A": A,
        "B": B,
    }


def triangle_geometry(points):
    """:class:`ElementGeometry` of a single triangle given its three vertices."""
    p = np.asarray(points, dtype=float).reshape(1, 3, 2)
    d1 = p[0, 1] - p[0, 0]
    d2 = p[0, 2] - p[0, 0]
    area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
    scale = max(np.sum(d1**2), np.sum(d2**2))
    if not area > 1e-14 * scale:
        raise GeometryError("degenerate or clockwise triangle")
    g = _geometry(p, np.array([area]))
    return ElementGeometry(
        vertices=p[0].copy(),
        centroid=g["centroid"][0],
        area=float(area),
        edge_lengths=g["edge_lengths"][0],
        heights=g["heights"][0],
        normals=g["normals"][0],
        H=float(g["H"][0]),
        A=float(g["A"][0]),
        B=float(g["B"][0]),
    )


def element_geometry(t, k):
    """Geometry of triangle ``k`` of ``t``."""
    if not 0 <= k < t.n_triangles:
        raise IndexError(f"triangle index {k} out of range")
    return triangle_geometry(t.vertices[t.triangles[k]])


def check_uniform(t, rtol=1e-9):
    """True iff every pair of adjacent triangles forms a parallelogram."""
    interior = np.flatnonzero(~t.boundary_edges)
    if len(interior) == 0:
        return True
    k1, k2 = t.edge_tris[interior, 0], t.edge_tris[interior, 1]
    a = t.vertices[t.edges[interior, 0]]
    b = t.vertices[t.edges[interior, 1]]
    o1 = _opposite(t, k1, interior)
    o2 = _opposite(t, k2, interior)
    gap = np.linalg.norm(o1 + o2 - a - b, axis=1)
    local_h = np.linalg.norm(b - a, axis=1)
    return bool(np.all(gap <= rtol * local_h))


def _opposite(t, tris, edges):
    """Coordinates of the vertex of ``tris[j]`` opposite ``edges[j]``."""
    loc = np.argmax(t.tri_edges[tris] == edges[:, None], axis=1)
    return t.vertices[t.triangles[tris, loc]]


# ---------------------------------------------------------------------------
# plain-text export

def write_mesh(t, path):
    """Write nodes (``index x y tag``) and elements (``index v1 v2 v3``)."""
    node_tags = [set() for _ in range(t.n_vertices)]
    for e in np.flatnonzero(t.boundary_edges):
        for v in t.edges[e]:
            node_tags[v].add(str(t.edge_tags[e]))
    lines = [f"NODES {t.n_vertices}"]
    for i, (x, y) in enumerate(t.vertices):
        tag = "+".join(sorted(node_tags[i])) or "-"
        lines.append(f"{i} {float(x)!r} {float(y)!r} {tag}")
    lines.append(f"ELEMENTS {t.n_triangles}")
    for i, (a, b, c) in enumerate(t.triangles):
        lines.append(f"{i} {a} {b} {c}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path, level=1):
    """Inverse of :func:`write_mesh`.  Refinement genealogy is not stored."""
    rows = Path(path).read_text().split("\n")
    it = iter(r for r in rows if r.strip())
    head = next(it).split()
    if head[0] != "NODES":
        raise MeshError("expected NODES section")
    nv = int(head[1])
    verts = np.zeros((nv, 2))
    node_tags = []
    for _ in range(nv):
        i, x, y, tag = next(it).split()
        verts[int(i)] = float(x), float(y)
        node_tags.append(set() if tag == "-" else set(tag.split("+")))
    head = next(it).split()
    if head[0] != "ELEMENTS":
        raise MeshError("expected ELEMENTS section")
    nt = int(head[1])
    tris = np.zeros((nt, 3), dtype=np.int64)
    for _ in range(nt):
        i, a, b, c = next(it).split()
        tris[int(i)] = int(a), int(b), int(c)
    probe = Triangulation(verts, tris, _AnyLabel(), level=level)
    tags = {}
    for e in np.flatnonzero(probe.boundary_edges):
        a, b = probe.edges[e]
        common = sorted(node_tags[a] & node_tags[b])
        if not common:
            raise MeshError(f"boundary edge ({a}, {b}) has no common node tag")
        tags[(int(a), int(b))] = common[0]
    return Triangulation(verts, tris, tags, level=level)


class _AnyLabel(dict):
    def __contains__(self, key):
        return True

    def __getitem__(self, key):
        return "?"
