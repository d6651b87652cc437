"""Gradient recovery, recovered Hessians and the averaged conforming projection.

Two recovered-gradient representations are used:

* :class:`RecoveredGradient` -- a CR vector field given by its values at the
  edge midpoints (the operator ``K_h``),
* :class:`NodalGradient` -- a continuous P1 vector field given by vertex
  values (polynomial preserving recovery for P1 input).

Both expose ``values(bary)`` at barycentric points of every triangle and an
elementwise constant ``hessian()`` (the broken gradient of the field).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_stiffness
from .fespaces import ElementKind, FEFunction, bary_gradients, build_dofmap
from .quadrature import TRI_POINTS


class RecoveryError(RuntimeError):
    """The recovery stencil cannot be formed on this mesh."""


def edge_traces(q, t):
    """One-sided values of a field at every edge midpoint.

    ``q`` is a scalar :class:`FEFunction` (its broken gradient is used), an
    RT0 :class:`FEFunction`, an array of elementwise constant vectors
    (nt, 2), or a callable ``q(k, x) -> (n, 2)`` evaluating the restriction
    to triangle ``k`` at points ``x``.

    Returns an array (nt, 3, 2): the value on triangle ``k`` at the midpoint
    of its local edge ``i``.
    """
    mid_bary = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    if isinstance(q, FEFunction):
        if q.kind == ElementKind.RT0:
            return q.values(mid_bary)
        return q.gradients(mid_bary)
    if callable(q):
        x = t.midpoints[t.tri_edges]
        return np.stack([np.asarray(q(k, x[k]), dtype=float) for k in range(t.n_triangles)])
    q = np.asarray(q, dtype=float)
    if q.shape != (t.n_triangles, 2):
        raise ValueError("expected an elementwise constant field of shape (nt, 2)")
    return np.repeat(q[:, None, :], 3, axis=1)


@dataclass(eq=False)
class RecoveredGradient:
    """CR vector field: ``edge_values[e]`` is the value at the midpoint of edge ``e``."""

    mesh: object
    edge_values: np.ndarray
    #: for each boundary edge, the (e', e'') pair used in the extrapolation
    stencil: dict = field(default_factory=dict)

    def cell_values(self):
        return self.edge_values[self.mesh.tri_edges]  # (nt, 3, 2)

    def values(self, bary=TRI_POINTS):
        bary = np.atleast_2d(bary)
        return np.einsum("qi,tid->tqd", 1.0 - 2.0 * bary, self.cell_values())

    def hessian(self):
        """Elementwise gradient ``H[k, a, b] = d_b (K_h q)_a``; not symmetrized."""
        return recovered_hessian(self)

    def to_dict(self):
        return {"midpoints": self.mesh.midpoints.tolist(), "values": self.edge_values.tolist()}


def _boundary_stencil(t, e):
    """Interior edge ``e'`` of the boundary triangle and the far edge ``e''``."""
    k = t.edge_tris[e, 0]
    a, b = t.edges[e]
    best = None
    for e1 in t.tri_edges[k]:
        if e1 == e or t.boundary_edges[e1]:
            continue
        k2 = t.edge_tris[e1, 0] if t.edge_tris[e1, 0] != k else t.edge_tris[e1, 1]
        far = [e2 for e2 in t.tri_edges[k2] if a not in t.edges[e2] and b not in t.edges[e2]]
        if len(far) != 1:
            continue
        # prefer the sibling from the same coarse triangle, then a far edge in
        # the interior (its value is an average), then the smallest edge index
        sibling = t.parent is not None and t.parent[k2] == t.parent[k]
        key = (not sibling, bool(t.boundary_edges[far[0]]), int(e1))
        if best is None or key < best[0]:
            best = (key, int(e1), int(far[0]), int(k2))
    if best is None:
        raise RecoveryError(f"boundary edge {e} has no interior neighbour to extrapolate from")
    return best[1:]


def recover_Kh(q, t=None):
    """Midpoint-averaging gradient recovery ``K_h``.

    Interior midpoints get the mean of the two one-sided values.  At the
    midpoint ``m`` of a boundary edge of ``K`` the value is ``2 v(m') - v(m'')``
    where ``m'`` is the midpoint of an interior edge ``e'`` of ``K`` and ``m''``
    the midpoint of the edge of the neighbour across ``e'`` that does not
    touch the boundary edge.  If ``e''`` is itself on the boundary its
    one-sided value from the neighbour is used.

    When ``K`` has two interior edges the neighbour is chosen, in order of
    preference, as the triangle refined from the same parent as ``K``, one
    whose far edge is interior, or the one across the lower-numbered edge.
    On red-refined meshes the first rule always applies, which makes the
    stencil independent of the edge numbering.
    """
    if t is None:
        t = q.mesh
    tr = edge_traces(q, t)
    ne = t.n_edges
    val = np.zeros((ne, 2))
    cnt = np.zeros(ne)
    np.add.at(val, t.tri_edges.ravel(), tr.reshape(-1, 2))
    np.add.at(cnt, t.tri_edges.ravel(), 1.0)
    interior = ~t.boundary_edges
    out = np.zeros((ne, 2))
    out[interior] = val[interior] / cnt[interior, None]
    stencil = {}
    for e in np.flatnonzero(t.boundary_edges):
        e1, e2, k2 = _boundary_stencil(t, e)
        if t.boundary_edges[e2]:
            far = tr[k2, int(np.flatnonzero(t.tri_edges[k2] == e2)[0])]
        else:
            far = out[e2]
        out[e] = 2.0 * out[e1] - far
        stencil[int(e)] = (e1, e2)
    return RecoveredGradient(t, out, stencil)


def recovered_hessian(kq):
    """Broken gradient of each component of a CR vector field, (nt, 2, 2)."""
    t = kq.mesh
    corners = t.vertices[t.triangles]
    G = -2.0 * bary_gradients(corners, t.areas)  # CR basis gradients (nt, 3, 2)
    return np.einsum("tia,tib->tab", kq.cell_values(), G)


# ---------------------------------------------------------------------------
# polynomial preserving recovery for P1


@dataclass(eq=False)
class NodalGradient:
    """Continuous piecewise linear vector field from vertex values."""

    mesh: object
    vertex_values: np.ndarray  # (nv, 2)
    fallback_vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def values(self, bary=TRI_POINTS):
        bary = np.atleast_2d(bary)
        return np.einsum("qi,tid->tqd", bary, self.vertex_values[self.mesh.triangles])

    def hessian(self):
        t = self.mesh
        G = bary_gradients(t.vertices[t.triangles], t.areas)
        return np.einsum("tia,tib->tab", self.vertex_values[t.triangles], G)


def _vertex_neighbours(t):
    nbr = [set() for _ in range(t.n_vertices)]
    for a, b in t.edges:
        nbr[a].add(int(b))
        nbr[b].add(int(a))
    return nbr


def recover_ppr(u):
    """Polynomial preserving recovery of the gradient of a P1 function.

    At every vertex a quadratic is fitted by least squares to the nodal
    values of the vertices of its element patch (extended by one more ring
    when the patch has fewer than six points) and differentiated at the
    vertex.  When the fit is rank deficient the area-weighted mean of the
    adjacent element gradients is used instead; such vertices are listed in
    ``fallback_vertices``.
    """
    if u.kind != ElementKind.P1:
        raise ValueError("polynomial preserving recovery expects a P1 function")
    t = u.mesh
    nodal = u.entity_values()
    nbr = _vertex_neighbours(t)
    grads = u.gradients(TRI_POINTS[:1])[:, 0]
    out = np.zeros((t.n_vertices, 2))
    fallback = []
    for z in range(t.n_vertices):
        patch = {z} | nbr[z]
        if len(patch) < 6:
            for w in list(patch):
                patch |= nbr[w]
        idx = np.array(sorted(patch))
        d = t.vertices[idx] - t.vertices[z]
        s = np.max(np.abs(d)) or 1.0
        d = d / s
        V = np.column_stack([np.ones(len(idx)), d[:, 0], d[:, 1], d[:, 0] ** 2,
                             d[:, 0] * d[:, 1], d[:, 1] ** 2])
        if len(idx) >= 6 and np.linalg.matrix_rank(V) == 6:
            c = np.linalg.lstsq(V, nodal[idx], rcond=None)[0]
            out[z] = c[1:3] / s
        else:
            tris = np.flatnonzero(np.any(t.triangles == z, axis=1))
            w = t.areas[tris]
            out[z] = w @ grads[tris] / w.sum()
            fallback.append(z)
    return NodalGradient(t, out, np.array(fallback, dtype=int))


# ---------------------------------------------------------------------------
# averaged conforming projection


@dataclass(eq=False)
class RayleighResult:
    """Normalized conforming P1 function and its Rayleigh quotient."""

    u_p1star: FEFunction
    lambda_p1star: float


def cr_vertex_traces(u):
    """Values of a CR function at the vertices of every triangle, (nt, 3)."""
    c = u.cell_coeffs()
    return c.sum(axis=1, keepdims=True) - 2.0 * c


def project_p1star(u, bc=None):
    """Average a CR function to a conforming P1 function and normalize it.

    Each vertex gets the arithmetic mean of the traces from its triangles;
    vertices on Dirichlet segments get zero.  ``bc`` defaults to the
    boundary conditions of ``u``.
    """
    if u.kind != ElementKind.CR:
        raise ValueError("project_p1star expects a CR function")
    t = u.mesh
    tr = cr_vertex_traces(u)
    s = np.bincount(t.triangles.ravel(), weights=tr.ravel(), minlength=t.n_vertices)
    n = np.bincount(t.triangles.ravel(), minlength=t.n_vertices)
    dm = build_dofmap(t, ElementKind.P1, u.dofmap.bc if bc is None else bc)
    coeffs = (s / n)[dm.free_entities]
    v = FEFunction(dm, coeffs)
    norm = v.l2_norm()
    if not norm > 0:
        raise ValueError("averaged function vanishes")
    v = FEFunction(dm, coeffs / norm)
    A = assemble_stiffness(t, dm)
    return RayleighResult(v, float(v.coeffs @ (A @ v.coeffs)))

