"""Degrees of freedom, local bases and canonical interpolation.

Supported element kinds

* ``CR``  -- piecewise linear, one mean value per edge
* ``ECR`` -- CR enriched elementwise by ``x1**2 + x2**2``; edge means plus
  one element mean
* ``P1``  -- conforming linear, vertex values
* ``RT0`` -- lowest order Raviart-Thomas, mean normal component per edge
  (taken along the global edge normal)
* ``P0``  -- piecewise constants

Local bases are written in barycentric coordinates ``lam``.  With
``phi_i = 1 - 2 lam_i`` the CR basis, and the element bubble
``b = 2 - 36/H_K |x - M_K|^2`` (zero mean on every edge, unit mean on the
element), the ECR nodal basis is ``phi_i - b/3`` for the edges and ``b`` for
the element.  The RT0 basis for edge ``i`` is ``s_i (x - p_i) / d_i`` with
``s_i = +-1`` aligning the local outward normal with the global one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mesh import MeshError
from .quadrature import TRI_POINTS, edge_means, integrate_triangles, map_points


class ElementKind(str, enum.Enum):
    CR = "CR"
    ECR = "ECR"
    P1 = "P1"
    RT0 = "RT0"
    P0 = "P0"


class ConfigurationError(ValueError):
    """Boundary conditions do not match the mesh."""


class EvaluationError(ValueError):
    """Point is outside the requested element."""


def normalize_bc(t, bc):
    """Map every boundary segment label of ``t`` to ``dirichlet`` or ``neumann``.

    ``bc`` may be ``None`` (all Dirichlet), one of the two strings (applied to
    every segment) or a dict keyed by segment label.
    """
    labels = t.segment_labels()
    if bc is None:
        bc = "dirichlet"
    if isinstance(bc, str):
        bc = {lab: bc for lab in labels}
    bc = {str(k): str(v).lower() for k, v in dict(bc).items()}
    missing = [lab for lab in labels if lab not in bc]
    if missing:
        raise ConfigurationError(f"no boundary condition for segments {missing}")
    bad = {v for v in bc.values() if v not in ("dirichlet", "neumann")}
    if bad:
        raise ConfigurationError(f"unknown boundary condition(s) {sorted(bad)}")
    return {lab: bc[lab] for lab in labels}


@dataclass(frozen=True, eq=False)
class DofMap:
    """Global numbering of the free degrees of freedom of one element kind.

    ``entity_dofs[j]`` is the free dof index of entity ``j`` or -1 if the
    entity is constrained.  Entities are edges (CR, RT0), edges followed by
    triangles (ECR), vertices (P1) or triangles (P0).
    """

    kind: ElementKind
    mesh: object
    bc: dict
    entity_dofs: np.ndarray
    cell_entities: np.ndarray

    @property
    def n_entities(self):
        return len(self.entity_dofs)

    @property
    def n_free(self):
        return int(np.count_nonzero(self.entity_dofs >= 0))

    @property
    def free_entities(self):
        return np.flatnonzero(self.entity_dofs >= 0)

    @property
    def constrained_entities(self):
        return np.flatnonzero(self.entity_dofs < 0)

    @property
    def cell_dofs(self):
        return self.entity_dofs[self.cell_entities]

    def __repr__(self):
        return f"DofMap({self.kind.value}, free={self.n_free}, total={self.n_entities})"


def build_dofmap(t, kind, bc=None):
    """Number the degrees of freedom of ``kind`` on ``t``.

    Dirichlet segments remove CR/ECR edge dofs and P1 vertex dofs.  For RT0 the
    roles swap: the primal Neumann condition becomes an essential zero-flux
    condition, so edges on Neumann segments are removed.
    """
    kind = ElementKind(kind)
    bc = normalize_bc(t, bc)
    dirichlet_edge = np.array(
        [bool(b) and bc[str(tag)] == "dirichlet" for b, tag in zip(t.boundary_edges, t.edge_tags)],
        dtype=bool,
    )
    neumann_edge = t.boundary_edges & ~dirichlet_edge

    nt, ne = t.n_triangles, t.n_edges
    if kind == ElementKind.CR:
        free = ~dirichlet_edge
        cells = t.tri_edges
    elif kind == ElementKind.ECR:
        free = np.concatenate([~dirichlet_edge, np.ones(nt, dtype=bool)])
        cells = np.hstack([t.tri_edges, ne + np.arange(nt)[:, None]])
    elif kind == ElementKind.P1:
        free = np.ones(t.n_vertices, dtype=bool)
        free[np.unique(t.edges[dirichlet_edge])] = False
        cells = t.triangles
    elif kind == ElementKind.RT0:
        free = ~neumann_edge
        cells = t.tri_edges
    else:
        free = np.ones(nt, dtype=bool)
        cells = np.arange(nt)[:, None]
    entity_dofs = np.full(len(free), -1, dtype=np.int64)
    entity_dofs[free] = np.arange(np.count_nonzero(free))
    return DofMap(kind, t, bc, entity_dofs, np.ascontiguousarray(cells))


# ---------------------------------------------------------------------------
# local bases


def bary_gradients(corners, areas):
    """Gradients of the barycentric coordinates, shape (nt, 3, 2)."""
    nxt = corners[:, [1, 2, 0]]
    prv = corners[:, [2, 0, 1]]
    v = prv - nxt
    return np.stack([-v[..., 1], v[..., 0]], axis=2) / (2.0 * areas[:, None, None])


def _heights(corners, areas):
    nxt = corners[:, [1, 2, 0]]
    prv = corners[:, [2, 0, 1]]
    return 2.0 * areas[:, None] / np.linalg.norm(prv - nxt, axis=2)


def _areas(corners):
    d1 = corners[:, 1] - corners[:, 0]
    d2 = corners[:, 2] - corners[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def local_basis(kind, corners, bary=TRI_POINTS, signs=None):
    """Values and derivatives of the local basis at barycentric points.

    Returns ``(values, derivs)``:

    * scalar kinds: values (nt, nq, nloc), derivs = gradients (nt, nq, nloc, 2)
    * RT0: values (nt, nq, 3, 2), derivs = divergences (nt, 3)
    """
    kind = ElementKind(kind)
    corners = np.asarray(corners, dtype=float)
    bary = np.atleast_2d(bary)
    nt, nq = len(corners), len(bary)
    areas = _areas(corners)
    G = bary_gradients(corners, areas)
    if kind == ElementKind.P1:
        vals = np.broadcast_to(bary, (nt, nq, 3)).copy()
        grads = np.broadcast_to(G[:, None], (nt, nq, 3, 2)).copy()
        return vals, grads
    if kind == ElementKind.CR:
        vals = np.broadcast_to(1.0 - 2.0 * bary, (nt, nq, 3)).copy()
        grads = np.broadcast_to(-2.0 * G[:, None], (nt, nq, 3, 2)).copy()
        return vals, grads
    if kind == ElementKind.ECR:
        x = map_points(corners, bary)
        M = corners.mean(axis=1)
        H = np.sum((corners[:, [1, 2, 0]] - corners[:, [2, 0, 1]]) ** 2, axis=(1, 2))
        r = x - M[:, None]
        b = 2.0 - 36.0 / H[:, None] * np.sum(r**2, axis=2)
        db = -72.0 / H[:, None, None] * r
        vals = np.empty((nt, nq, 4))
        vals[..., :3] = (1.0 - 2.0 * bary)[None] - b[..., None] / 3.0
        vals[..., 3] = b
        grads = np.empty((nt, nq, 4, 2))
        grads[:, :, :3] = -2.0 * G[:, None] - db[:, :, None] / 3.0
        grads[:, :, 3] = db
        return vals, grads
    if kind == ElementKind.RT0:
        if signs is None:
            signs = np.ones((nt, 3))
        d = _heights(corners, areas)
        x = map_points(corners, bary)
        scale = signs / d
        vals = (x[:, :, None, :] - corners[:, None, :, :]) * scale[:, None, :, None]
        div = 2.0 * scale
        return vals, div
    vals = np.ones((nt, nq, 1))
    grads = np.zeros((nt, nq, 1, 2))
    return vals, grads


# ---------------------------------------------------------------------------
# finite element functions


@dataclass(eq=False)
class FEFunction:
    """Coefficients over the free dofs of a :class:`DofMap`."""

    dofmap: DofMap
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.dofmap.n_free,):
            raise ValueError(
                f"expected {self.dofmap.n_free} coefficients, got shape {self.coeffs.shape}")

    @property
    def kind(self):
        return self.dofmap.kind

    @property
    def mesh(self):
        return self.dofmap.mesh

    def entity_values(self):
        """Coefficients on all entities, zero on constrained ones."""
        full = np.zeros(self.dofmap.n_entities)
        free = self.dofmap.entity_dofs >= 0
        full[free] = self.coeffs[self.dofmap.entity_dofs[free]]
        return full

    def cell_coeffs(self):
        return self.entity_values()[self.dofmap.cell_entities]

    def _basis(self, bary):
        t = self.mesh
        signs = t.edge_signs() if self.kind == ElementKind.RT0 else None
        return local_basis(self.kind, t.vertices[t.triangles], bary, signs)

    def values(self, bary=TRI_POINTS):
        """Values at barycentric points of every triangle: (nt, nq) or (nt, nq, 2) for RT0."""
        vals, _ = self._basis(bary)
        c = self.cell_coeffs()
        if self.kind == ElementKind.RT0:
            return np.einsum("tqid,ti->tqd", vals, c)
        return np.einsum("tqi,ti->tq", vals, c)

    def gradients(self, bary=TRI_POINTS):
        """Broken gradients (nt, nq, 2) of a scalar function."""
        if self.kind == ElementKind.RT0:
            raise TypeError("RT0 functions have a divergence, not a gradient")
        _, grads = self._basis(bary)
        return np.einsum("tqid,ti->tqd", grads, self.cell_coeffs())

    def divergence(self):
        """Elementwise constant divergence (nt,) of an RT0 function."""
        if self.kind != ElementKind.RT0:
            raise TypeError("divergence is defined for RT0 functions only")
        _, div = self._basis(TRI_POINTS[:1])
        return np.einsum("ti,ti->t", div, self.cell_coeffs())

    def l2_norm(self):
        v = self.values()
        sq = v**2 if v.ndim == 2 else np.sum(v**2, axis=2)
        return float(np.sqrt(np.sum(integrate_triangles(sq, self.mesh.areas))))

    def to_dict(self):
        return {"kind": self.kind.value, "coeffs": self.coeffs.tolist()}


def barycentric(corners, x):
    """Barycentric coordinates of point ``x`` in the triangle ``corners`` (3, 2)."""
    corners = np.asarray(corners, dtype=float)
    T = np.column_stack([corners[0] - corners[2], corners[1] - corners[2]])
    l01 = np.linalg.solve(T, np.asarray(x, dtype=float) - corners[2])
    return np.array([l01[0], l01[1], 1.0 - l01[0] - l01[1]])


def evaluate(u, k, x, tol=1e-10):
    """Value and derivative of ``u`` at point ``x`` of triangle ``k``.

    Returns ``(value, gradient)`` for scalar kinds and ``(value, divergence)``
    for RT0.
    """
    t = u.mesh
    corners = t.vertices[t.triangles[k]]
    lam = barycentric(corners, x)
    if np.any(lam < -tol) or np.any(lam > 1 + tol):
        raise EvaluationError(f"point {tuple(x)} is outside triangle {k}")
    signs = t.edge_signs()[k:k + 1] if u.kind == ElementKind.RT0 else None
    vals, der = local_basis(u.kind, corners[None], lam[None], signs)
    c = u.cell_coeffs()[k]
    if u.kind == ElementKind.RT0:
        return vals[0, 0].T @ c, float(der[0] @ c)
    return float(vals[0, 0] @ c), der[0, 0].T @ c


# ---------------------------------------------------------------------------
# canonical interpolation


def interpolation_values(kind, f, t):
    """Canonical interpolation on all entities (constraints ignored).

    ``f`` maps an array of points (..., 2) to values (...) or, for RT0, to
    vectors (..., 2).
    """
    kind = ElementKind(kind)
    v = t.vertices
    a, b = v[t.edges[:, 0]], v[t.edges[:, 1]]
    if kind == ElementKind.CR:
        return edge_means(f, a, b)
    if kind == ElementKind.ECR:
        x = map_points(v[t.triangles])
        cell = integrate_triangles(np.asarray(f(x), dtype=float), t.areas) / t.areas
        return np.concatenate([edge_means(f, a, b), cell])
    if kind == ElementKind.P1:
        return np.asarray(f(v), dtype=float)
    if kind == ElementKind.P0:
        x = map_points(v[t.triangles])
        return integrate_triangles(np.asarray(f(x), dtype=float), t.areas) / t.areas
    # RT0: mean normal component along the global edge normal
    tri = t.edge_tris[:, 0]
    loc = np.argmax(t.tri_edges[tri] == np.arange(t.n_edges)[:, None], axis=1)
    corners = v[t.triangles[tri]]
    nxt = corners[np.arange(t.n_edges), (loc + 1) % 3]
    prv = corners[np.arange(t.n_edges), (loc + 2) % 3]
    tang = prv - nxt
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1) / np.linalg.norm(tang, axis=1)[:, None]
    means = edge_means(f, a, b)
    return np.sum(means * normal, axis=1)


def canonical_interpolate(kind, f, t, dofmap=None):
    """Canonical interpolant of ``f`` as an :class:`FEFunction`.

    CR: edge means; ECR: edge and element means; P1: vertex values;
    P0: element means; RT0: mean normal flux per edge.  Values on constrained
    entities are dropped.
    """
    kind = ElementKind(kind)
    if dofmap is None:
        dofmap = build_dofmap(t, kind, "neumann" if kind != ElementKind.RT0 else "dirichlet")
    if dofmap.kind != kind:
        raise ValueError("dofmap kind does not match")
    full = interpolation_values(kind, f, t)
    return FEFunction(dofmap, full[dofmap.free_entities])


def from_entity_values(dofmap, values):
    """FEFunction whose free coefficients are taken from a full entity array."""
    return FEFunction(dofmap, np.asarray(values, dtype=float)[dofmap.free_entities])


def require_mesh(t, *functions):
    for u in functions:
        if u.mesh is not t:
            raise MeshError("functions live on different meshes")
