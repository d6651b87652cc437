"""Stiffness, mass, load and mixed Raviart-Thomas systems.

Dirichlet conditions are imposed by omitting constrained dofs, so the
assembled stiffness and mass matrices are symmetric positive (semi)definite.

The mixed system follows the convention

    (sigma, tau) - (u, div tau) = 0,     (div sigma, v) = (f, v),

so that ``sigma`` approximates ``-grad u`` for ``-lap u = f``.  Problems written
with the opposite sign on ``u`` (flux ``+grad u``) are obtained by negating
the load and both solution components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fespaces import ElementKind, build_dofmap, local_basis
from .quadrature import TRI_POINTS, TRI_WEIGHTS, map_points


def _scatter(local, rows, cols, shape):
    mask = (rows >= 0) & (cols >= 0)
    A = sp.coo_matrix((local[mask], (rows[mask], cols[mask])), shape=shape)
    return A.tocsr()


def assemble_cells(local, cell_dofs, n):
    """Assemble element matrices (nt, k, k) into an (n, n) CSR matrix."""
    k = cell_dofs.shape[1]
    rows = np.repeat(cell_dofs, k, axis=1)
    cols = np.tile(cell_dofs, (1, k))
    return _scatter(local.reshape(len(local), -1), rows, cols, (n, n))


def _scalar_kind(dofmap):
    kind = ElementKind(dofmap.kind)
    if kind not in (ElementKind.CR, ElementKind.ECR, ElementKind.P1):
        raise ValueError(f"{kind.value} is not a primal scalar kind; use assemble_rt_saddle")
    return kind


def _local_stiffness(t, kind):
    _, grads = local_basis(kind, t.vertices[t.triangles])
    return np.einsum("tqid,tqjd,q->tij", grads, grads, TRI_WEIGHTS) * t.areas[:, None, None]


def _local_mass(t, kind):
    vals, _ = local_basis(kind, t.vertices[t.triangles])
    return np.einsum("tqi,tqj,q->tij", vals, vals, TRI_WEIGHTS) * t.areas[:, None, None]


def assemble_stiffness(t, dofmap):
    """Matrix of ``sum_K int_K grad phi_i . grad phi_j`` over the free dofs."""
    kind = _scalar_kind(dofmap)
    A = assemble_cells(_local_stiffness(t, kind), dofmap.cell_dofs, dofmap.n_free)
    # round-off from the quadrature sum can break exact symmetry
    return ((A + A.T) * 0.5).tocsr()


def assemble_mass(t, dofmap):
    """Matrix of ``int phi_i phi_j`` over the free dofs."""
    kind = _scalar_kind(dofmap)
    if kind == ElementKind.CR:
        # midpoint rule is exact and the CR basis is orthogonal
        local = np.zeros((t.n_triangles, 3, 3))
        idx = np.arange(3)
        local[:, idx, idx] = t.areas[:, None] / 3.0
    else:
        local = _local_mass(t, kind)
    M = assemble_cells(local, dofmap.cell_dofs, dofmap.n_free)
    return ((M + M.T) * 0.5).tocsr()


def _load_values(f, t):
    x = map_points(t.vertices[t.triangles])
    if callable(f):
        return np.asarray(f(x), dtype=float) * np.ones(x.shape[:2])
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(x.shape[:2], float(f))
    if f.shape == (t.n_triangles,):
        return np.repeat(f[:, None], x.shape[1], axis=1)
    if f.shape == x.shape[:2]:
        return f
    raise ValueError("load must be callable, scalar, per-triangle or per-quadrature-point")


def assemble_load(t, dofmap, f):
    """Vector of ``int f phi_i`` over the free dofs.

    ``f`` may be a callable of points (..., 2), a scalar, an array of
    per-triangle constants (nt,) or values at the quadrature points (nt, nq).
    """
    kind = ElementKind(dofmap.kind)
    fq = _load_values(f, t)
    if kind == ElementKind.RT0:
        raise ValueError("RT0 has no scalar load; use assemble_rt_saddle")
    vals, _ = local_basis(kind, t.vertices[t.triangles])
    local = np.einsum("tqi,tq,q->ti", vals, fq, TRI_WEIGHTS) * t.areas[:, None]
    dofs = dofmap.cell_dofs
    mask = dofs >= 0
    return np.bincount(dofs[mask], weights=local[mask], minlength=dofmap.n_free)


@dataclass(eq=False)
class SaddleSystem:
    """Block system ``[[M, -B^T], [B, 0]] (sigma, u) = (0, F)``."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    flux_dofmap: object
    disp_dofmap: object

    @property
    def n_flux(self):
        return self.flux_dofmap.n_free

    @property
    def n_disp(self):
        return self.disp_dofmap.n_free


def rt_mass(t, dofmap):
    signs = t.edge_signs()
    vals, _ = local_basis(ElementKind.RT0, t.vertices[t.triangles], TRI_POINTS, signs)
    local = np.einsum("tqid,tqjd,q->tij", vals, vals, TRI_WEIGHTS) * t.areas[:, None, None]
    M = assemble_cells(local, dofmap.cell_dofs, dofmap.n_free)
    return ((M + M.T) * 0.5).tocsr()


def rt_divergence(t, dofmap):
    """Matrix ``B[K, i] = int_K div sigma_i``, shape (nt, n_flux)."""
    signs = t.edge_signs()
    _, div = local_basis(ElementKind.RT0, t.vertices[t.triangles], TRI_POINTS[:1], signs)
    local = div * t.areas[:, None]
    rows = np.repeat(np.arange(t.n_triangles)[:, None], 3, axis=1)
    return _scatter(local, rows, dofmap.cell_dofs, (t.n_triangles, dofmap.n_free))


def assemble_rt_saddle(t, f, bc=None):
    """Mixed RT0 x P0 system for the load ``f``."""
    flux = build_dofmap(t, ElementKind.RT0, bc)
    disp = build_dofmap(t, ElementKind.P0, bc)
    M = rt_mass(t, flux)
    B = rt_divergence(t, flux)
    K = sp.bmat([[M, -B.T], [B, None]], format="csr")
    F = assemble_load(t, disp, f)
    rhs = np.concatenate([np.zeros(flux.n_free), F])
    return SaddleSystem(K, rhs, flux, disp)


def write_coo(A, path):
    """Write a sparse matrix as ``i j value`` lines."""
    A = sp.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write(f"{i} {j} {float(v)!r}\n")
