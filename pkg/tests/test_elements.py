"""Reference-element machinery: shape functions, quadrature, mappings."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darcyfem.elements import (
    MappedPoint,
    default_rule,
    gauss_1d,
    gauss_rule,
    geometry_batch,
    hessian_to_physical,
    map_to_physical,
    n_basis,
    reference_basis,
    reference_nodes,
    tabulate,
)


def monomial_integral_1d(k: int) -> float:
    # int_{-1}^{1} t^k dt
    return 0.0 if k % 2 else 2.0 / (k + 1)


unit_points = st.tuples(
    st.floats(-1.0, 1.0, allow_nan=False),
    st.floats(-1.0, 1.0, allow_nan=False),
)


def test_n_basis():
    assert n_basis(1) == 4
    assert n_basis(2) == 9
    with pytest.raises(ValueError):
        n_basis(3)


def test_reference_nodes_layout():
    q1 = reference_nodes(1)
    np.testing.assert_allclose(
        q1, [(-1, -1), (1, -1), (1, 1), (-1, 1)])
    q2 = reference_nodes(2)
    # corners first, then edge midpoints bottom/right/top/left, then center
    np.testing.assert_allclose(q2[:4], q1)
    np.testing.assert_allclose(
        q2[4:], [(0, -1), (1, 0), (0, 1), (-1, 0), (0, 0)])


def test_gauss_1d_two_points():
    x, w = gauss_1d(2)
    np.testing.assert_allclose(sorted(x), [-1 / np.sqrt(3), 1 / np.sqrt(3)])
    np.testing.assert_allclose(w, [1.0, 1.0])


def test_gauss_1d_three_points():
    x, w = gauss_1d(3)
    order = np.argsort(x)
    np.testing.assert_allclose(x[order], [-np.sqrt(3 / 5), 0.0, np.sqrt(3 / 5)])
    np.testing.assert_allclose(w[order], [5 / 9, 8 / 9, 5 / 9])


def test_gauss_1d_rejects_unsupported():
    with pytest.raises(ValueError):
        gauss_1d(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_tensor_rule_monomial_exactness(n):
    """n-point tensor Gauss integrates x^a y^b exactly for a, b <= 2n-1."""
    rule = gauss_rule(n)
    assert rule.n_points == n * n
    np.testing.assert_allclose(rule.weights.sum(), 4.0)
    for a in range(2 * n):
        for b in range(2 * n):
            val = np.sum(rule.weights * rule.points[:, 0] ** a
                         * rule.points[:, 1] ** b)
            exact = monomial_integral_1d(a) * monomial_integral_1d(b)
            np.testing.assert_allclose(val, exact, atol=1e-14)


def test_rule_integrates_x4y2():
    # int x^4 y^2 over the reference square = (2/5)(2/3)
    rule = gauss_rule(3)
    val = np.sum(rule.weights * rule.points[:, 0] ** 4 * rule.points[:, 1] ** 2)
    np.testing.assert_allclose(val, 4.0 / 15.0, atol=1e-15)


def test_default_rules():
    assert default_rule(1).n_points == 9
    assert default_rule(2).n_points == 16


@pytest.mark.parametrize("order", [1, 2])
@given(point=unit_points)
@settings(max_examples=50, deadline=None)
def test_partition_of_unity(order, point):
    shapes = reference_basis(order, point)
    np.testing.assert_allclose(shapes.values.sum(), 1.0, atol=1e-13)
    np.testing.assert_allclose(shapes.gradients.sum(axis=0), 0.0, atol=1e-12)


@pytest.mark.parametrize("order", [1, 2])
def test_nodal_delta_property(order):
    nodes = reference_nodes(order)
    vals, _, _ = tabulate(order, nodes)
    np.testing.assert_allclose(vals, np.eye(n_basis(order)), atol=1e-14)


def test_reference_basis_rejects_outside_point():
    with pytest.raises(ValueError):
        reference_basis(1, (1.5, 0.0))


@pytest.mark.parametrize("order", [1, 2])
def test_gradients_match_finite_differences(order):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-0.99, 0.99, size=(20, 2))
    _, grads, _ = tabulate(order, pts)
    eps = 1e-6
    for c in range(2):
        shift = np.zeros(2)
        shift[c] = eps
        vp, _, _ = tabulate(order, pts + shift)
        vm, _, _ = tabulate(order, pts - shift)
        fd = (vp - vm) / (2 * eps)
        np.testing.assert_allclose(grads[:, :, c], fd, atol=5e-9)


@pytest.mark.parametrize("order", [1, 2])
def test_hessians_match_finite_differences(order):
    rng = np.random.default_rng(8)
    pts = rng.uniform(-0.99, 0.99, size=(10, 2))
    _, _, hess = tabulate(order, pts)
    eps = 1e-5
    # columns are ordered d_xx, d_xy, d_yy
    for col, (ci, cj) in enumerate(((0, 0), (0, 1), (1, 1))):
        si, sj = np.zeros(2), np.zeros(2)
        si[ci] = eps
        sj[cj] = eps
        vpp, _, _ = tabulate(order, pts + si + sj)
        vpm, _, _ = tabulate(order, pts + si - sj)
        vmp, _, _ = tabulate(order, pts - si + sj)
        vmm, _, _ = tabulate(order, pts - si - sj)
        fd = (vpp - vpm - vmp + vmm) / (4 * eps * eps)
        np.testing.assert_allclose(hess[:, :, col], fd, atol=5e-5)


def test_map_to_physical_affine():
    # parallelogram: affine image of the reference square
    coords = np.array([[0.0, 0.0], [2.0, 0.2], [2.5, 1.4], [0.5, 1.2]])
    mp = map_to_physical(coords, 1, (0.3, -0.4))
    assert isinstance(mp, MappedPoint)
    expect_jac = np.array([[1.0, 0.25], [0.1, 0.6]])
    np.testing.assert_allclose(mp.jacobian, expect_jac, atol=1e-14)
    np.testing.assert_allclose(mp.det, np.linalg.det(expect_jac), atol=1e-14)
    # centroid maps to the vertex average
    mid = map_to_physical(coords, 1, (0.0, 0.0))
    np.testing.assert_allclose(mid.x, coords.mean(axis=0), atol=1e-14)


def test_map_to_physical_rejects_inverted_element():
    coords = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])  # CW
    with pytest.raises(ValueError):
        map_to_physical(coords, 1, (0.0, 0.0))


def test_physical_gradient_of_linear_field_is_exact():
    coords = np.array([[0.0, 0.0], [2.0, 0.2], [2.5, 1.4], [0.5, 1.2]])
    nodal = 3.0 * coords[:, 0] - 2.0 * coords[:, 1] + 1.0
    mp = map_to_physical(coords, 1, (0.27, 0.61))
    grad = nodal @ mp.gradients
    np.testing.assert_allclose(grad, [3.0, -2.0], atol=1e-13)


def test_geometry_batch_matches_pointwise_map():
    rng = np.random.default_rng(11)
    base = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    coords = np.stack([base + off for off in rng.uniform(0, 5, size=(3, 2))])
    coords += rng.uniform(-0.05, 0.05, size=coords.shape)
    rule = default_rule(1)
    _, dN, _ = tabulate(1, rule.points)
    jac, det, grads = geometry_batch(coords, dN)
    for e in range(3):
        for q, pt in enumerate(rule.points):
            mp = map_to_physical(coords[e], 1, pt)
            np.testing.assert_allclose(jac[e, q], mp.jacobian, atol=1e-13)
            np.testing.assert_allclose(det[e, q], mp.det, atol=1e-13)
            np.testing.assert_allclose(grads[e, q], mp.gradients, atol=1e-12)


def test_hessian_to_physical_quadratic_field():
    # axis-aligned rectangle, so the chain rule has no curvature terms
    hx, hy = 0.5, 0.25
    coords_c = np.array([[0, 0], [hx, 0], [hx, hy], [0, hy]], dtype=float)
    mids = np.array([[hx / 2, 0], [hx, hy / 2], [hx / 2, hy], [0, hy / 2],
                     [hx / 2, hy / 2]])
    coords = np.vstack([coords_c, mids])
    nodal = (2.0 * coords[:, 0] ** 2 + 3.0 * coords[:, 0] * coords[:, 1]
             - coords[:, 1] ** 2)
    pts = np.array([[0.2, -0.3]])
    _, _, ref_hess = tabulate(2, pts)
    jac = np.array([[hx / 2, 0.0], [0.0, hy / 2]])
    phys = hessian_to_physical(ref_hess[0], jac)
    hess_field = nodal @ phys  # (3,) -> d_xx, d_xy, d_yy
    np.testing.assert_allclose(hess_field, [4.0, 3.0, -2.0], atol=1e-11)
