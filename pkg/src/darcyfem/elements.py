"""Reference-element machinery for quadrilateral Lagrange elements.

Shape functions live on the reference square [-1, 1]^2.  Two families are
supported: the 4-node bilinear element (order 1) and the 9-node biquadratic
element (order 2).  Quadrature is tensor-product Gauss-Legendre.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Local node layout on the reference square.  Corners run counterclockwise
# from the lower-left; the 9-node element appends mid-edge nodes (bottom,
# right, top, left) and finally the centroid.
Q1_NODES = np.array(
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
)
Q2_NODES = np.array(
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0),
     (0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, 0.0)]
)

# 1D factor index per local node (0 -> t=-1, 1 -> t=0, 2 -> t=+1).
_Q2_FACTORS = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (2, 1), (1, 2), (0, 1), (1, 1)]


def n_basis(order: int) -> int:
    if order == 1:
        return 4
    if order == 2:
        return 9
    raise ValueError(f"unsupported element order {order}")


def reference_nodes(order: int) -> np.ndarray:
    return Q1_NODES if order == 1 else Q2_NODES if order == 2 else _bad_order(order)


def _bad_order(order):
    raise ValueError(f"unsupported element order {order}")


def _lag1(t):
    """Linear Lagrange factors on {-1, +1}: values, first and second derivatives."""
    t = np.asarray(t, dtype=float)
    vals = np.stack([0.5 * (1.0 - t), 0.5 * (1.0 + t)], axis=-1)
    d1 = np.broadcast_to(np.array([-0.5, 0.5]), vals.shape).copy()
    d2 = np.zeros_like(vals)
    return vals, d1, d2


def _lag2(t):
    """Quadratic Lagrange factors on {-1, 0, +1}: values, first and second derivatives."""
    t = np.asarray(t, dtype=float)
    vals = np.stack([0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)], axis=-1)
    d1 = np.stack([t - 0.5, -2.0 * t, t + 0.5], axis=-1)
    d2 = np.broadcast_to(np.array([1.0, -2.0, 1.0]), vals.shape).copy()
    return vals, d1, d2


def tabulate(order: int, points: np.ndarray):
    """Evaluate all shape functions at an array of reference points.

    Parameters
    ----------
    order : 1 or 2.
    points : (nq, 2) reference coordinates.

    Returns
    -------
    values : (nq, n_basis)
    gradients : (nq, n_basis, 2) reference-coordinate gradients.
    hessians : (nq, n_basis, 3) second derivatives ordered (xx, xy, yy).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xi, eta = pts[:, 0], pts[:, 1]
    if order == 1:
        fx, dfx, d2fx = _lag1(xi)
        fy, dfy, d2fy = _lag1(eta)
        pairs = [(0, 0), (1, 0), (1, 1), (0, 1)]
    elif order == 2:
        fx, dfx, d2fx = _lag2(xi)
        fy, dfy, d2fy = _lag2(eta)
        pairs = _Q2_FACTORS
    else:
        _bad_order(order)
    nb = len(pairs)
    nq = pts.shape[0]
    values = np.empty((nq, nb))
    grads = np.empty((nq, nb, 2))
    hess = np.empty((nq, nb, 3))
    for a, (i, j) in enumerate(pairs):
        values[:, a] = fx[:, i] * fy[:, j]
        grads[:, a, 0] = dfx[:, i] * fy[:, j]
        grads[:, a, 1] = fx[:, i] * dfy[:, j]
        hess[:, a, 0] = d2fx[:, i] * fy[:, j]
        hess[:, a, 1] = dfx[:, i] * dfy[:, j]
        hess[:, a, 2] = fx[:, i] * d2fy[:, j]
    return values, grads, hess


@dataclass(frozen=True)
class ShapeSet:
    """Shape-function values and reference gradients at one point."""

    order: int
    values: np.ndarray
    gradients: np.ndarray


def reference_basis(order: int, point) -> ShapeSet:
    """Shape functions of the given order at a single reference point.

    The values form a partition of unity and the gradient rows sum to zero;
    at a local node the basis is the Kronecker delta.
    """
    pt = np.asarray(point, dtype=float)
    if pt.shape != (2,):
        raise ValueError("reference point must have two components")
    if np.any(np.abs(pt) > 1.0 + 1e-12):
        raise ValueError(f"reference point {pt} outside [-1,1]^2")
    values, grads, _ = tabulate(order, pt[None, :])
    return ShapeSet(order=order, values=values[0], gradients=grads[0])


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor-product Gauss-Legendre rule on the reference square."""

    points: np.ndarray   # (nq, 2)
    weights: np.ndarray  # (nq,)

    @property
    def n_points(self) -> int:
        return self.weights.size


def gauss_1d(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if not 1 <= n <= 5:
        raise ValueError(f"points per direction must be in 1..5, got {n}")
    return np.polynomial.legendre.leggauss(n)


def gauss_rule(n: int) -> QuadratureRule:
    """Tensor-product rule with n points per direction (1 <= n <= 5).

    Exact for bivariate polynomials of degree 2n-1 in each variable;
    weights are positive and sum to the reference area 4.
    """
    x, w = gauss_1d(n)
    xg, yg = np.meshgrid(x, x, indexing="ij")
    wg = np.outer(w, w)
    points = np.column_stack([xg.ravel(), yg.ravel()])
    return QuadratureRule(points=points, weights=wg.ravel())


def default_rule(order: int) -> QuadratureRule:
    """Default volume rule: 3x3 for order 1, 4x4 for order 2."""
    return gauss_rule(order + 2)


@dataclass(frozen=True)
class MappedPoint:
    """Isoparametric map data at one reference point of one element."""

    x: np.ndarray          # physical coordinates (2,)
    jacobian: np.ndarray   # (2, 2), d x_i / d xi_j
    det: float
    gradients: np.ndarray  # (n_basis, 2) physical shape gradients


def geometry_batch(coords: np.ndarray, ref_grads: np.ndarray):
    """Jacobians, determinants and physical gradients for an element batch.

    Parameters
    ----------
    coords : (ne, n_basis, 2) nodal coordinates per element.
    ref_grads : (nq, n_basis, 2) reference gradients at the quadrature points.

    Returns
    -------
    jac : (ne, nq, 2, 2), det : (ne, nq), grads : (ne, nq, n_basis, 2).
    """
    jac = np.einsum("eai,qaj->eqij", coords, ref_grads)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    inv = np.empty_like(jac)
    inv[..., 0, 0] = jac[..., 1, 1]
    inv[..., 0, 1] = -jac[..., 0, 1]
    inv[..., 1, 0] = -jac[..., 1, 0]
    inv[..., 1, 1] = jac[..., 0, 0]
    inv = inv / det[..., None, None]
    # physical gradient: grad_x phi = J^{-T} grad_xi phi
    grads = np.einsum("qaj,eqji->eqai", ref_grads, inv)
    return jac, det, grads


def map_to_physical(coords: np.ndarray, order: int, point) -> MappedPoint:
    """Map one reference point through the isoparametric element map.

    coords holds the element's nodal coordinates, (n_basis, 2).  Raises on a
    non-positive Jacobian determinant (degenerate or inverted element).
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (n_basis(order), 2):
        raise ValueError(
            f"expected {n_basis(order)} nodal coordinates for order {order}, "
            f"got shape {coords.shape}"
        )
    values, grads, _ = tabulate(order, np.asarray(point, dtype=float)[None, :])
    jac, det, phys = geometry_batch(coords[None, :, :], grads)
    d = float(det[0, 0])
    if d <= 0.0:
        raise ValueError(f"non-positive Jacobian determinant {d:g}")
    x = values[0] @ coords
    return MappedPoint(x=x, jacobian=jac[0, 0], det=d, gradients=phys[0, 0])


def hessian_to_physical(ref_hess: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """Physical second derivatives (xx, xy, yy) for an affine element map.

    Valid when the Jacobian is constant over the element (parallelogram
    cells), which holds for the structured rectangular meshes used here.
    """
    inv = np.linalg.inv(jac)
    out = np.empty_like(ref_hess)
    h_ref = np.empty(ref_hess.shape[:-1] + (2, 2))
    h_ref[..., 0, 0] = ref_hess[..., 0]
    h_ref[..., 0, 1] = ref_hess[..., 1]
    h_ref[..., 1, 0] = ref_hess[..., 1]
    h_ref[..., 1, 1] = ref_hess[..., 2]
    h_phys = np.einsum("ki,...kl,lj->...ij", inv, h_ref, inv)
    out[..., 0] = h_phys[..., 0, 0]
    out[..., 1] = h_phys[..., 0, 1]
    out[..., 2] = h_phys[..., 1, 1]
    return out
