"""Fixed symmetric quadrature rules used by every integral in the package."""
import numpy as np

_a = (6.0 - np.sqrt(15.0)) / 21.0
_b = (6.0 + np.sqrt(15.0)) / 21.0
_wa = (155.0 - np.sqrt(15.0)) / 1200.0
_wb = (155.0 + np.sqrt(15.0)) / 1200.0

#: 7-point rule on triangles, exact for degree <= 5.  Barycentric points,
#: weights normalized to sum to one (multiply by the area).
TRI_POINTS = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_a, _a, 1 - 2 * _a],
    [_a, 1 - 2 * _a, _a],
    [1 - 2 * _a, _a, _a],
    [_b, _b, 1 - 2 * _b],
    [_b, 1 - 2 * _b, _b],
    [1 - 2 * _b, _b, _b],
])
TRI_WEIGHTS = np.array([9 / 40, _wa, _wa, _wa, _wb, _wb, _wb])

#: 3-point Gauss rule on [0, 1], exact for degree <= 5.
_g = np.sqrt(3.0 / 5.0) / 2.0
EDGE_POINTS = np.array([0.5 - _g, 0.5, 0.5 + _g])
EDGE_WEIGHTS = np.array([5 / 18, 8 / 18, 5 / 18])


def map_points(corners, bary=TRI_POINTS):
    """Physical coordinates of barycentric points on each triangle.

    ``corners`` has shape (nt, 3, 2); the result has shape (nt, nq, 2).
    """
    return np.einsum("qi,tid->tqd", bary, corners)


def integrate_triangles(values, areas):
    """Sum over quadrature points: ``values`` (nt, nq, ...) -> (nt, ...)."""
    w = TRI_WEIGHTS * 1.0
    return np.einsum("tq...,q->t...", values, w) * areas.reshape((-1,) + (1,) * (values.ndim - 2))


def edge_points(a, b):
    """Gauss points on segments from ``a`` to ``b`` (arrays of shape (n, 2))."""
    s = EDGE_POINTS[None, :, None]
    return a[:, None, :] * (1 - s) + b[:, None, :] * s


def edge_means(f, a, b):
    """Mean of ``f`` along each segment; ``f`` maps (..., 2) -> (...) or (..., k)."""
    vals = np.asarray(f(edge_points(a, b)), dtype=float)
    return np.einsum("nq...,q->n...", vals, EDGE_WEIGHTS)
