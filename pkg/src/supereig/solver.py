"""Generalized symmetric eigenproblems and source problems."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import assemble_load, assemble_mass, assemble_rt_saddle, assemble_stiffness
from .fespaces import ElementKind, FEFunction, build_dofmap

#: below this dimension the eigenproblem is solved densely
DENSE_LIMIT = 2000
#: eigenvalues closer than this (relative) are reported as one cluster
CLUSTER_RTOL = 1e-8


class SolverError(RuntimeError):
    """A linear or eigenvalue solve failed; ``residual`` holds the achieved residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(eq=False)
class EigenResult:
    """Smallest eigenpairs, ascending, mass-normalized with a fixed sign."""

    eigenvalues: np.ndarray
    vectors: np.ndarray  # (n, k) coefficient columns
    residuals: np.ndarray
    dofmap: object = None
    clusters: list = field(default_factory=list)

    def __len__(self):
        return len(self.eigenvalues)

    def function(self, i):
        if self.dofmap is None:
            raise ValueError("no dofmap attached")
        return FEFunction(self.dofmap, self.vectors[:, i])

    @property
    def functions(self):
        return [self.function(i) for i in range(len(self))]


def _fix_sign(V, rtol=1e-8):
    # first coefficient within rtol of the largest magnitude; symmetric
    # meshes produce ties that round-off would otherwise break arbitrarily
    a = np.abs(V)
    idx = np.argmax(a >= (1.0 - rtol) * a.max(axis=0), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def _clusters(lam):
    groups, cur = [], [0]
    for i in range(1, len(lam)):
        if abs(lam[i] - lam[i - 1]) <= CLUSTER_RTOL * abs(lam[i]):
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return [g for g in groups if len(g) > 1]


def _m_orthonormalize(V, M, lam):
    # re-orthogonalize within clusters; distinct eigenvalues are already
    # M-orthogonal up to solver accuracy
    V = V.copy()
    for g in _clusters(lam) or []:
        G = V[:, g]
        S = G.T @ (M @ G)
        L = np.linalg.cholesky(S)
        V[:, g] = np.linalg.solve(L, G.T).T
    norms = np.sqrt(np.einsum("ij,ij->j", V, M @ V))
    return V / norms


def solve_evp(A, M, k=1, dofmap=None, tol=1e-10):
    """The ``k`` smallest eigenpairs of ``A u = lam M u``.

    Dense LAPACK below :data:`DENSE_LIMIT` unknowns, otherwise ARPACK in
    shift-invert mode around zero with a fixed start vector.
    """
    n = A.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"requested {k} eigenpairs of a {n}-dimensional problem")
    A = sp.csr_matrix(A)
    M = sp.csr_matrix(M)
    if n <= DENSE_LIMIT:
        lam, V = sla.eigh(A.toarray(), M.toarray(), subset_by_index=[0, k - 1])
    else:
        try:
            lam, V = spla.eigsh(A.tocsc(), k=k, M=M.tocsc(), sigma=0.0, which="LM",
                                v0=np.ones(n), tol=1e-13, maxiter=20 * n)
        except spla.ArpackNoConvergence as exc:
            raise SolverError("eigensolver did not converge", None) from exc
        order = np.argsort(lam)
        lam, V = lam[order], V[:, order]
    V = _fix_sign(_m_orthonormalize(V, M, lam))
    R = A @ V - (M @ V) * lam
    scale = np.linalg.norm((M @ V) * lam, axis=0)
    res = np.linalg.norm(R, axis=0) / np.where(scale > 0, scale, 1.0)
    if np.any(res > tol):
        raise SolverError(f"eigen residual {res.max():.3e} above {tol:.1e}", res)
    return EigenResult(lam, V, res, dofmap, _clusters(lam))


def eigenpairs(t, kind, k=1, bc=None, tol=1e-10):
    """Assemble and solve the eigenproblem for ``kind`` on ``t``."""
    dm = build_dofmap(t, kind, bc)
    return solve_evp(assemble_stiffness(t, dm), assemble_mass(t, dm), k, dm, tol)


def _direct_solve(K, b, tol, what):
    if not np.any(b):
        return np.zeros_like(b)
    try:
        with np.errstate(all="raise"):
            x = spla.splu(sp.csc_matrix(K)).solve(b)
    except (RuntimeError, FloatingPointError) as exc:
        raise SolverError(f"{what}: factorization failed ({exc})") from exc
    res = np.linalg.norm(K @ x - b) / np.linalg.norm(b)
    if not np.isfinite(res) or res > tol:
        raise SolverError(f"{what}: relative residual {res:.3e}", res)
    return x


def solve_source(t, dofmap, f, tol=1e-12):
    """Discrete Poisson solution ``a_h(u, v) = (f, v)`` for ``dofmap.kind``."""
    A = assemble_stiffness(t, dofmap)
    b = assemble_load(t, dofmap, f)
    return FEFunction(dofmap, _direct_solve(A, b, tol, "source problem"))


def solve_rt_source(t, f, bc=None, tol=1e-10):
    """Mixed RT0 x P0 solution ``(sigma, u)`` with ``sigma ~ -grad u``."""
    S = assemble_rt_saddle(t, f, bc)
    x = _direct_solve(S.matrix, S.rhs, tol, "mixed problem")
    return FEFunction(S.flux_dofmap, x[:S.n_flux]), FEFunction(S.disp_dofmap, x[S.n_flux:])
