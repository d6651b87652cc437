"""Leading terms of interpolation errors and eigenvalue error estimators.

For a quadratic ``w`` the interpolation errors of the CR, ECR and RT0
interpolants on a triangle ``K`` are fixed combinations of a few functions
centred at the centroid ``M``::

    phi1_RT  = (x1 - M1, M2 - x2)        phi2_RT  = (x2 - M2, x1 - M1)
    phi1_ECR = (x1 - M1)^2 - (x2 - M2)^2 phi2_ECR = (x1 - M1)(x2 - M2)
    phi3_ECR = 2 - 36/H |x - M|^2

with coefficients depending only on the (constant) Hessian of ``w`` and the
triangle constants ``A``, ``B`` and ``H`` (see :mod:`supereig.mesh`).  The
functions below evaluate those combinations for any 2x2 matrix, so the
same formulas act as estimators when the Hessian is a recovered one.

Mixed second derivatives are taken as ``(hess[0, 1] + hess[1, 0]) / 2``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .fespaces import bary_gradients, require_mesh
from .mesh import ElementGeometry, _geometry
from .quadrature import EDGE_POINTS, EDGE_WEIGHTS, TRI_POINTS, TRI_WEIGHTS, map_points

TAYLOR_KINDS = ("CR", "ECR", "RT")


class DegenerateWeightsError(ZeroDivisionError):
    """The two estimators coincide, so combination weights are undefined."""


def _hess_parts(hess):
    hess = np.asarray(hess, dtype=float)
    h11 = hess[..., 0, 0]
    h22 = hess[..., 1, 1]
    h12 = 0.5 * (hess[..., 0, 1] + hess[..., 1, 0])
    return h11, h22, h12


def _shape_constants(corners):
    """Centroid (nt, 2), A, B, H (nt,) for triangles (nt, 3, 2)."""
    g = _geometry(corners, _signed_area(corners))
    return g["centroid"], g["A"], g["B"], g["H"]


def _ecr_phis(x, M, H):
    r = x - M[:, None, :]
    f1 = r[..., 0] ** 2 - r[..., 1] ** 2
    f2 = r[..., 0] * r[..., 1]
    f3 = 2.0 - 36.0 / H[:, None] * np.sum(r**2, axis=-1)
    return f1, f2, f3


def _edge_bary():
    # Gauss points on local edge i (opposite vertex i), shape (3, ng, 3)
    s = EDGE_POINTS
    out = np.zeros((3, len(s), 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out[i, :, j] = 1.0 - s
        out[i, :, k] = s
    return out


_EDGE_BARY = _edge_bary()


def _ecr_complement(corners, bary):
    """``(I - Pi_ECR) phi1`` and ``(I - Pi_ECR) phi2`` at barycentric points.

    The CR part of the interpolant is fixed by the edge means; the remaining
    element mean is matched with the bubble ``phi3`` (zero edge means, unit
    mean).  Returns arrays (nt, nq) for both functions and ``phi3``.
    """
    M, _, _, H = _shape_constants(corners)
    x = map_points(corners, bary)
    f1, f2, f3 = _ecr_phis(x, M, H)
    xe = np.einsum("iqj,tjd->tiqd", _EDGE_BARY, corners)
    xc = map_points(corners, TRI_POINTS)
    out = []
    for idx, f in ((0, f1), (1, f2)):
        ge = _ecr_phis(xe.reshape(len(corners), -1, 2), M, H)[idx].reshape(len(corners), 3, -1)
        em = ge @ EDGE_WEIGHTS  # (nt, 3) edge means
        cm = _ecr_phis(xc, M, H)[idx] @ TRI_WEIGHTS  # element mean
        cr = np.einsum("qi,ti->tq", 1.0 - 2.0 * bary, em)
        out.append(f - cr - (cm - em.mean(axis=1))[:, None] * f3)
    return out[0], out[1], f3


def _signed_area(corners):
    d1 = corners[:, 1] - corners[:, 0]
    d2 = corners[:, 2] - corners[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _rt_phis(x, M):
    r = x - M[:, None, :]
    f1 = np.stack([r[..., 0], -r[..., 1]], axis=-1)
    f2 = np.stack([r[..., 1], r[..., 0]], axis=-1)
    return f1, f2


def _rt_complement(corners, bary):
    """``(I - Pi_RT) phi1_RT`` and ``(I - Pi_RT) phi2_RT``, each (nt, nq, 2).

    ``Pi_RT v = sum_j (v(m_j) . n_j / d_j) (x - p_j)`` for linear ``v``, with
    ``n_j`` the outward unit normal of the edge opposite ``p_j`` and ``d_j``
    the height onto it.
    """
    M = corners.mean(axis=1)
    G = bary_gradients(corners, _signed_area(corners))
    # grad lam_j points from edge j towards p_j: n_j = -grad/|grad|, d_j = 1/|grad|
    gn = np.linalg.norm(G, axis=2)
    n = -G / gn[..., None]
    mids = 0.5 * (corners[:, [1, 2, 0]] + corners[:, [2, 0, 1]])
    x = map_points(corners, bary)
    out = []
    for k in range(2):
        vm = _rt_phis(mids, M)[k]  # (nt, 3, 2)
        coef = np.sum(vm * n, axis=2) * gn  # / d_j
        proj = np.einsum("tj,tqjd->tqd", coef, x[:, :, None, :] - corners[:, None, :, :])
        out.append(_rt_phis(x, M)[k] - proj)
    return out


def taylor_values(kind, hess, corners, bary=TRI_POINTS):
    """Values of the expansion term ``P_K`` at barycentric points.

    ``hess`` is (nt, 2, 2), ``corners`` (nt, 3, 2).  Returns (nt, nq) for
    CR/ECR and (nt, nq, 2) for RT.
    """
    kind = str(getattr(kind, "value", kind)).upper()
    if kind == "RT0":
        kind = "RT"
    corners = np.asarray(corners, dtype=float)
    bary = np.atleast_2d(bary)
    h11, h22, h12 = _hess_parts(hess)
    if kind == "RT":
        g1, g2 = _rt_complement(corners, bary)
        return 0.5 * (h11 - h22)[:, None, None] * g1 + h12[:, None, None] * g2
    if kind not in ("CR", "ECR"):
        raise ValueError(f"unknown expansion kind {kind!r}")
    g1, g2, f3 = _ecr_complement(corners, bary)
    val = 0.25 * (h11 - h22)[:, None] * g1 + h12[:, None] * g2
    if kind == "CR":
        _, A, B, H = _shape_constants(corners)
        c3 = -(A + H) / 144.0 * h11 - (H - A) / 144.0 * h22 - B / 36.0 * h12
        val = val + c3[:, None] * f3
    return val


def _corners_of(geom):
    if isinstance(geom, ElementGeometry):
        return np.asarray(geom.vertices, dtype=float)[None]
    return np.asarray(geom, dtype=float).reshape(1, 3, 2)


def taylor_P(kind, hess, geom):
    """Expansion term ``P_K`` on one triangle as a function of physical points.

    ``geom`` is an :class:`~supereig.mesh.ElementGeometry` or the (3, 2)
    vertex array.  The returned callable maps points (..., 2) to values
    (...) for CR/ECR and (..., 2) for RT.
    """
    name = str(getattr(kind, "value", kind)).upper()
    if name not in TAYLOR_KINDS + ("RT0",):
        raise ValueError(f"unknown expansion kind {kind!r}")
    corners = _corners_of(geom)
    hess = np.asarray(hess, dtype=float).reshape(1, 2, 2)
    T = np.column_stack([corners[0, 0] - corners[0, 2], corners[0, 1] - corners[0, 2]])
    Tinv = np.linalg.inv(T)

    def P(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 2)
        l01 = (flat - corners[0, 2]) @ Tinv.T
        bary = np.column_stack([l01, 1.0 - l01.sum(axis=1)])
        v = taylor_values(kind, hess, corners, bary)[0]
        return v.reshape(x.shape[:-1] + v.shape[1:])

    return P


def rt_coefficients(geom):
    """Symmetric 2x2 matrix ``c[i, j] = int_K (I-Pi_RT)phi_i . (I-Pi_RT)phi_j``."""
    corners = _corners_of(geom)
    return rt_coefficients_all(corners)[0]


def rt_coefficients_all(corners):
    corners = np.asarray(corners, dtype=float)
    g1, g2 = _rt_complement(corners, TRI_POINTS)
    area = np.abs(_signed_area(corners))
    g = np.stack([g1, g2], axis=2)  # (nt, nq, 2, 2): [.., i, component]
    return np.einsum("tqid,tqjd,q->tij", g, g, TRI_WEIGHTS) * area[:, None, None]


def rt_expansion_norm(hess, geom):
    """``||P_K^RT(hess)||^2`` from the closed-form quadratic in the Hessian."""
    c = rt_coefficients(geom)
    h11, h22, h12 = _hess_parts(hess)
    return float(0.25 * c[0, 0] * (h11 - h22) ** 2 + c[1, 1] * h12**2
                 + c[0, 1] * (h11 - h22) * h12)


# ---------------------------------------------------------------------------
# estimators


@dataclass
class EstimatorReport:
    lambda_h: float
    F: float
    term_gradient: float
    term_interp: float
    lambda_rea: float

    def to_dict(self):
        return asdict(self)


def _scalar_kind(kind):
    kind = str(getattr(kind, "value", kind)).upper()
    if kind in ("P1", "P1*", "P1-STYLE", "CONFORMING"):
        return "P1"
    if kind not in ("CR", "ECR"):
        raise ValueError(f"no estimator for kind {kind!r}")
    return kind


def estimator_F(u_h, lambda_h, recovered, kind=None):
    """A posteriori estimate ``F`` of ``lambda - lambda_h``.

    ``u_h`` is a mass-normalized discrete eigenfunction, ``recovered`` a
    recovered gradient on the same mesh (anything with ``values(bary)`` and
    ``hessian()``).  For ``kind`` CR or ECR::

        F = ||R - grad_h u_h||^2 - 2 lambda_h sum_K int_K P_K(grad_h R) u_h

    For a conforming ``u_h`` (``kind='P1'``) the discrete eigenvalue is an
    upper bound, so the estimate is ``F = -||R - grad u_h||^2``.
    ``kind`` defaults to the kind of ``u_h``.
    """
    t = u_h.mesh
    if recovered.mesh is not t:
        require_mesh(t, recovered)
    kind = _scalar_kind(u_h.kind if kind is None else kind)
    diff = recovered.values(TRI_POINTS) - u_h.gradients(TRI_POINTS)
    sq = np.einsum("tqd,tqd,q->t", diff, diff, TRI_WEIGHTS) @ t.areas
    if kind == "P1":
        grad_term, interp = -float(sq), 0.0
    else:
        corners = t.vertices[t.triangles]
        P = taylor_values(kind, recovered.hessian(), corners, TRI_POINTS)
        uq = u_h.values(TRI_POINTS)
        interp = -2.0 * lambda_h * float(np.einsum("tq,tq,q->t", P, uq, TRI_WEIGHTS) @ t.areas)
        grad_term = float(sq)
    lam = float(lambda_h)
    rea = lam + (grad_term + interp)
    # recompute F from the rounded sum so that lambda_rea - lambda_h == F exactly
    F = rea - lam
    return EstimatorReport(lam, F, grad_term, F - grad_term, rea)


def recovering_eigenvalue(lambda_h, F):
    return lambda_h + F


def combining_eigenvalue(lambda1, F1, lambda2, F2, rtol=1e-14):
    """Weighted average ``(F2 lambda1 - F1 lambda2) / (F2 - F1)``.

    Exact whenever ``lambda1 + F1 == lambda2 + F2``.
    """
    gap = F2 - F1
    if abs(gap) <= rtol * max(abs(F1), abs(F2), np.finfo(float).tiny):
        raise DegenerateWeightsError("estimators coincide; combination undefined")
    return F2 / gap * lambda1 - F1 / gap * lambda2


def extrapolate(lambda_h, lambda_2h):
    """Richardson extrapolation for second order convergence."""
    return (4.0 * lambda_h - lambda_2h) / 3.0
