import numpy as np
import pytest
from hypothesis import given, strategies as st

from supereig.fespaces import (
    ConfigurationError, ElementKind, EvaluationError, FEFunction, build_dofmap,
    canonical_interpolate, evaluate, normalize_bc,
)
from supereig.mesh import build_domain
from supereig.quadrature import TRI_POINTS, TRI_WEIGHTS, map_points

G3 = (np.array([-1.0, 0.0, 1.0]) * np.sqrt(0.6) + 1) / 2
W3 = np.array([5, 8, 5]) / 18


def cubic(x):
    return 1 + x[..., 0] ** 3 - 2 * x[..., 0] * x[..., 1] ** 2 + 0.5 * x[..., 1]


def cubic_grad(x):
    gx = 3 * x[..., 0] ** 2 - 2 * x[..., 1] ** 2
    gy = -4 * x[..., 0] * x[..., 1] + 0.5
    return np.stack([gx, gy], axis=-1)


def vector_field(x):
    return np.stack([np.sin(x[..., 0] + 2 * x[..., 1]), x[..., 0] ** 2 * x[..., 1]], axis=-1)


@pytest.mark.parametrize("kind,bc,n", [
    ("CR", "dirichlet", 1), ("CR", "neumann", 5), ("ECR", "dirichlet", 3),
    ("P1", "dirichlet", 0), ("P1", "neumann", 4), ("RT0", "dirichlet", 5),
    ("RT0", "neumann", 1), ("P0", None, 2),
])
def test_dof_counts_on_two_triangle_square(kind, bc, n):
    t = build_domain("unit-square", 1)
    assert build_dofmap(t, kind, bc).n_free == n


def test_mixed_bc_dofs():
    t = build_domain("unit-square", 3)
    bc = {"left": "dirichlet", "bottom": "dirichlet", "top": "dirichlet", "right": "neumann"}
    dm = build_dofmap(t, "CR", bc)
    right = (t.edge_tags == "right")
    assert np.all(dm.entity_dofs[right] >= 0)
    assert dm.n_free == int(np.sum(~t.boundary_edges) + right.sum())


def test_normalize_bc_errors():
    t = build_domain("unit-square", 1)
    with pytest.raises(ConfigurationError):
        normalize_bc(t, {"left": "dirichlet"})
    with pytest.raises(ConfigurationError):
        normalize_bc(t, "robin")
    assert normalize_bc(t, None) == {s: "dirichlet" for s in ("bottom", "left", "right", "top")}


@pytest.mark.parametrize("kind", ["CR", "ECR", "P1"])
def test_affine_functions_are_reproduced(kind):
    t = build_domain("perturbed-square", 2)

    def f(x):
        return 0.3 - 1.2 * x[..., 0] + 2.5 * x[..., 1]

    u = canonical_interpolate(kind, f, t)
    x = map_points(t.vertices[t.triangles])
    np.testing.assert_allclose(u.values(), f(x), atol=1e-13)
    np.testing.assert_allclose(u.gradients(), np.broadcast_to([-1.2, 2.5], x.shape), atol=1e-12)


def test_ecr_reproduces_radial_quadratic():
    t = build_domain("equilateral-triangle", 2)

    def f(x):
        return 2 - x[..., 0] + (x[..., 0] ** 2 + x[..., 1] ** 2)

    u = canonical_interpolate("ECR", f, t)
    x = map_points(t.vertices[t.triangles])
    np.testing.assert_allclose(u.values(), f(x), atol=1e-12)
    grad = np.stack([2 * x[..., 0] - 1, 2 * x[..., 1]], axis=-1)
    np.testing.assert_allclose(u.gradients(), grad, atol=1e-11)


def test_rt_reproduces_constants_and_divergence():
    t = build_domain("l-shape", 2)
    u = canonical_interpolate("RT0", lambda x: np.broadcast_to([0.7, -0.2], x.shape), t)
    np.testing.assert_allclose(u.values(), np.broadcast_to([0.7, -0.2], u.values().shape), atol=1e-13)
    np.testing.assert_allclose(u.divergence(), 0, atol=1e-12)
    # x itself is in RT0 with divergence 2
    w = canonical_interpolate("RT0", lambda x: x.copy(), t)
    np.testing.assert_allclose(w.divergence(), 2.0, atol=1e-12)
    xq = map_points(t.vertices[t.triangles])
    np.testing.assert_allclose(w.values(), xq, atol=1e-12)


@pytest.mark.parametrize("kind", ["CR", "ECR", "P1", "RT0", "P0"])
def test_interpolation_is_idempotent(kind, rng):
    t = build_domain("perturbed-square", 2)
    dm = build_dofmap(t, kind, "neumann" if kind != "RT0" else "dirichlet")
    u = FEFunction(dm, rng.standard_normal(dm.n_free))
    corners = t.vertices[t.triangles]
    v = canonical_interpolate(kind, lambda x: _pointwise(u, corners, x), t, dm)
    np.testing.assert_allclose(v.coeffs, u.coeffs, atol=1e-10)


def _pointwise(u, corners, x):
    flat = x.reshape(-1, 2)
    out = []
    for p in flat:
        for k in range(len(corners)):
            try:
                val, _ = evaluate(u, k, p, tol=1e-12)
            except EvaluationError:
                continue
            # one-sided values suffice: edge means and normal fluxes agree
            # from both sides
            out.append(val)
            break
    out = np.array(out)
    return out.reshape(x.shape[:-1] + out.shape[1:])


def test_fortin_property():
    t = build_domain("perturbed-square", 3)
    u = canonical_interpolate("RT0", vector_field, t)
    corners = t.vertices[t.triangles]
    flux = np.zeros(t.n_triangles)
    for i in range(3):
        a, b = corners[:, (i + 1) % 3], corners[:, (i + 2) % 3]
        d = b - a
        n = np.stack([d[:, 1], -d[:, 0]], axis=1)  # outward for counterclockwise, length |e|
        for s, w in zip(G3, W3):
            flux += w * np.sum(vector_field(a + s * d) * n, axis=1)
    np.testing.assert_allclose(u.divergence() * t.areas, flux, atol=1e-12)


def test_cr_commuting_property():
    t = build_domain("perturbed-square", 3)
    u = canonical_interpolate("CR", cubic, t)
    x = map_points(t.vertices[t.triangles])
    exact = np.einsum("tqd,q->td", cubic_grad(x), TRI_WEIGHTS) * t.areas[:, None]
    discrete = u.gradients(TRI_POINTS[:1])[:, 0] * t.areas[:, None]
    np.testing.assert_allclose(discrete, exact, atol=1e-13)


def test_ecr_commuting_property():
    # int_K grad(w - Pi w) . grad v = 0 for v in ECR(K), i.e. against 1 and x
    t = build_domain("equilateral-triangle", 3)
    u = canonical_interpolate("ECR", cubic, t)
    x = map_points(t.vertices[t.triangles])
    diff = cubic_grad(x) - u.gradients()
    a = t.areas
    np.testing.assert_allclose(np.einsum("tqd,q->td", diff, TRI_WEIGHTS) * a[:, None], 0, atol=1e-13)
    np.testing.assert_allclose(np.einsum("tqd,tqd,q->t", diff, x, TRI_WEIGHTS) * a, 0, atol=1e-13)


@pytest.mark.parametrize("kind", ["CR", "ECR"])
def test_weak_continuity(kind, rng):
    t = build_domain("l-shape", 2)
    dm = build_dofmap(t, kind, "dirichlet")
    u = FEFunction(dm, rng.standard_normal(dm.n_free))
    v = t.vertices
    for e in range(t.n_edges):
        a, b = v[t.edges[e, 0]], v[t.edges[e, 1]]
        pts = a + G3[:, None] * (b - a)
        means = []
        for k in t.edge_tris[e]:
            if k < 0:
                continue
            means.append(sum(w * evaluate(u, k, p)[0] for p, w in zip(pts, W3)))
        if t.boundary_edges[e]:
            assert means[0] == pytest.approx(0, abs=1e-12)
        else:
            assert means[0] == pytest.approx(means[1], abs=1e-12)


def test_cr_basis_is_nodal():
    t = build_domain("unit-square", 2)
    dm = build_dofmap(t, "CR", "neumann")
    for j in (0, 5, 11):
        c = np.zeros(dm.n_free)
        c[j] = 1
        u = FEFunction(dm, c)
        k = t.edge_tris[j, 0]
        for e in t.tri_edges[k]:
            val, _ = evaluate(u, k, t.midpoints[e])
            assert val == pytest.approx(1.0 if e == j else 0.0, abs=1e-14)


def test_evaluate_outside_raises():
    t = build_domain("unit-square", 1)
    u = canonical_interpolate("CR", lambda x: x[..., 0], t)
    with pytest.raises(EvaluationError):
        evaluate(u, 0, [0.0, 0.9])
    val, grad = evaluate(u, 0, [0.9, 0.1])
    assert val == pytest.approx(0.9)
    np.testing.assert_allclose(grad, [1, 0], atol=1e-14)


def test_coefficient_length_checked():
    t = build_domain("unit-square", 2)
    dm = build_dofmap(t, "CR")
    with pytest.raises(ValueError):
        FEFunction(dm, np.zeros(dm.n_free + 1))


def test_wrong_operation_for_kind():
    t = build_domain("unit-square", 2)
    u = canonical_interpolate("CR", lambda x: x[..., 0], t)
    with pytest.raises(TypeError):
        u.divergence()
    r = canonical_interpolate("RT0", lambda x: x.copy(), t)
    with pytest.raises(TypeError):
        r.gradients()


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.integers(1, 3))
def test_affine_exactness_property(c0, c1, c2, level):
    t = build_domain("perturbed-square", level)

    def f(x):
        return c0 + c1 * x[..., 0] + c2 * x[..., 1]

    for kind in ("CR", "ECR", "P1"):
        u = canonical_interpolate(kind, f, t)
        assert np.max(np.abs(u.values() - f(map_points(t.vertices[t.triangles])))) <= 1e-12 * (
            1 + abs(c0) + abs(c1) + abs(c2))


def test_l2_norm_of_constant():
    t = build_domain("l-shape", 2)
    u = canonical_interpolate("P0", lambda x: np.full(x.shape[:-1], 2.0), t)
    assert u.l2_norm() == pytest.approx(2 * np.sqrt(3))
    assert ElementKind("ECR") is ElementKind.ECR
