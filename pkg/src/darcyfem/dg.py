"""Interior-penalty discontinuous Galerkin potential solver.

The potential is approximated element by element with no continuity imposed.
On an interior edge shared by elements (hi, lo), hi the larger element index,
the jump is the hi trace minus the lo trace and the unit normal points out of
hi; averages are arithmetic means.  The edge bilinear form is

    alpha [p] {K grad q . n} - {K grad p . n} [q] + beta [p][q]

with beta = beta0 / h_e, plus the analogous boundary form where the trace
itself plays the jump and Dirichlet data is folded into the right-hand side.
alpha = -1 gives the symmetric variant; alpha = +1 makes the consistency
terms antisymmetric so the energy b(q, q) collects only the broken gradient
and the penalties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linsolve
from .assembly import LinearSystem
from .elements import (default_rule, gauss_1d, geometry_batch, n_basis,
                       reference_nodes, tabulate)
from .material import MaterialField
from .mesh import EDGE_CORNERS, InteriorEdge, QuadMesh


@dataclass(frozen=True)
class DGParams:
    """Interior-penalty parameters: consistency sign and penalty scale."""

    alpha: float
    beta0: float

    def __post_init__(self):
        if self.alpha not in (-1.0, 1.0):
            raise ValueError(f"alpha must be +1 or -1, got {self.alpha}")
        if self.beta0 < 0.0:
            raise ValueError(f"beta0 must be nonnegative, got {self.beta0}")


def default_beta0(order: int) -> float:
    """Penalty scale 10 k^2 for polynomial order k."""
    return 10.0 * order * order


@dataclass
class BrokenField:
    """Elementwise nodal coefficients, shape (n_elements, n_basis)."""

    coeffs: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.ravel()


def broken_from_continuous(mesh: QuadMesh, nodal: np.ndarray) -> BrokenField:
    """Inject a continuous nodal field into the broken space (zero jumps)."""
    nodal = np.asarray(nodal, dtype=float)
    if nodal.shape != (mesh.n_nodes,):
        raise ValueError(f"expected one value per node, got {nodal.shape}")
    return BrokenField(coeffs=nodal[mesh.elements].copy())


def broken_from_function(mesh: QuadMesh, fn) -> BrokenField:
    """Elementwise nodal interpolation of (x, y, side) -> value; two-sided
    fields stay two-sided along the interface."""
    coeffs = np.empty((mesh.n_elements, mesh.elements.shape[1]))
    for e in range(mesh.n_elements):
        xy = mesh.nodes[mesh.elements[e]]
        coeffs[e] = fn(xy[:, 0], xy[:, 1], int(mesh.elem_subdomain[e]))
    return BrokenField(coeffs=coeffs)


def edge_reference_points(order: int, edge: int, s: np.ndarray) -> np.ndarray:
    """Reference coordinates along a local edge for parameters s in [-1, 1],
    running in the element's counterclockwise edge direction."""
    a, b = EDGE_CORNERS[edge]
    ref = reference_nodes(order)
    ra, rb = ref[a], ref[b]
    s = np.asarray(s, dtype=float)
    return 0.5 * (ra + rb)[None, :] + 0.5 * np.outer(s, rb - ra)


def _edge_traces(mesh: QuadMesh, elem: int, edge: int, s: np.ndarray):
    """Shape values and physical gradients of one element's basis sampled
    along one of its edges."""
    pts = edge_reference_points(mesh.order, edge, s)
    N, dN, _ = tabulate(mesh.order, pts)
    coords = mesh.element_coords(elem)
    _, det, G = geometry_batch(coords[None, :, :], dN)
    if np.any(det[0] <= 0.0):
        raise ValueError(f"non-positive Jacobian in element {elem}")
    return N, G[0]


def _edge_frame(mesh: QuadMesh, elem: int, edge: int):
    """Edge endpoints (in the element's CCW direction), outward normal,
    length."""
    a, b = EDGE_CORNERS[edge]
    va = int(mesh.elements[elem, a])
    vb = int(mesh.elements[elem, b])
    xa, xb = mesh.nodes[va], mesh.nodes[vb]
    t = xb - xa
    length = float(np.linalg.norm(t))
    if length <= 0.0:
        raise ValueError(f"degenerate edge on element {elem}")
    normal = np.array([t[1], -t[0]]) / length
    return va, vb, normal, length


def _edge_quadrature(order: int):
    return gauss_1d(order + 1)


def _two_sided_traces(mesh: QuadMesh, edge: InteriorEdge, s: np.ndarray):
    """Traces of both adjacent elements at common physical points.

    The parameter s runs along the hi element's CCW edge direction; the lo
    element is sampled at the same physical locations.
    """
    va, vb, normal, length = _edge_frame(mesh, edge.elem_hi, edge.edge_hi)
    a_lo, b_lo = EDGE_CORNERS[edge.edge_lo]
    ga = int(mesh.elements[edge.elem_lo, a_lo])
    gb = int(mesh.elements[edge.elem_lo, b_lo])
    if (ga, gb) == (vb, va):
        s_lo = -s
    elif (ga, gb) == (va, vb):
        s_lo = s
    else:
        raise ValueError(
            f"elements {edge.elem_hi} and {edge.elem_lo} do not share a "
            f"conforming edge"
        )
    N_hi, G_hi = _edge_traces(mesh, edge.elem_hi, edge.edge_hi, s)
    N_lo, G_lo = _edge_traces(mesh, edge.elem_lo, edge.edge_lo, s_lo)
    return N_hi, G_hi, N_lo, G_lo, normal, length


def _side_tensor(mesh, material, elem):
    K, _ = material.tensors_at(int(mesh.elem_subdomain[elem]))
    return K


def interior_edge_block(mesh: QuadMesh, material: MaterialField,
                        params: DGParams, edge: InteriorEdge):
    """Edge matrix coupling the two adjacent elements.

    Returns (block, dofs): the (2 nb) x (2 nb) matrix over the stacked
    [hi, lo] element unknowns and their global broken indices.
    """
    s, w = _edge_quadrature(mesh.order)
    N_hi, G_hi, N_lo, G_lo, normal, length = _two_sided_traces(mesh, edge, s)
    nb = N_hi.shape[1]
    K_hi = _side_tensor(mesh, material, edge.elem_hi)
    K_lo = _side_tensor(mesh, material, edge.elem_lo)
    flux_hi = np.einsum("qai,i->qa", G_hi @ K_hi.T, normal)
    flux_lo = np.einsum("qai,i->qa", G_lo @ K_lo.T, normal)

    # stacked per-side trace data with jump signs: hi +1, lo -1
    S = np.concatenate([N_hi, -N_lo], axis=1)           # jumps
    F = 0.5 * np.concatenate([flux_hi, flux_lo], axis=1)  # flux averages

    wq = w * (0.5 * length)
    beta = params.beta0 / length
    block = np.einsum("q,qj,qi->ij", wq * params.alpha, S, F)
    block -= np.einsum("q,qj,qi->ij", wq, F, S)
    block += beta * np.einsum("q,qj,qi->ij", wq, S, S)
    dofs = np.concatenate([
        edge.elem_hi * nb + np.arange(nb),
        edge.elem_lo * nb + np.arange(nb),
    ])
    return block, dofs


def dg_jump_average(mesh: QuadMesh, material: MaterialField,
                    edge: InteriorEdge, field: BrokenField):
    """Jump, average and normal-flux average of a broken field along an
    interior edge, at the edge quadrature points.

    Jump is hi-trace minus lo-trace with the normal pointing out of hi.
    """
    s, _ = _edge_quadrature(mesh.order)
    N_hi, G_hi, N_lo, G_lo, normal, _ = _two_sided_traces(mesh, edge, s)
    q_hi = N_hi @ field.coeffs[edge.elem_hi]
    q_lo = N_lo @ field.coeffs[edge.elem_lo]
    K_hi = _side_tensor(mesh, material, edge.elem_hi)
    K_lo = _side_tensor(mesh, material, edge.elem_lo)
    flux_hi = np.einsum("qai,a,i->q", G_hi @ K_hi.T, field.coeffs[edge.elem_hi],
                        normal)
    flux_lo = np.einsum("qai,a,i->q", G_lo @ K_lo.T, field.coeffs[edge.elem_lo],
                        normal)
    return q_hi - q_lo, 0.5 * (q_hi + q_lo), 0.5 * (flux_hi + flux_lo)


def assemble_dg(mesh: QuadMesh, material: MaterialField, f, params: DGParams,
                g, rule=None) -> LinearSystem:
    """Assemble the broken potential system with weak Dirichlet data g.

    f and g are callables (x, y, side).  No unknowns are eliminated; the
    returned system is square over all broken coefficients.
    """
    rule = rule or default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    nb = n_basis(mesh.order)
    ndof = mesh.n_elements * nb
    coords = mesh.all_coords()
    rows, cols, vals = [], [], []
    b = np.zeros(ndof)

    for side in (1, 2):
        sel = np.flatnonzero(mesh.elem_subdomain == side)
        if sel.size == 0:
            continue
        K, _ = material.tensors_at(side)
        _, det, G = geometry_batch(coords[sel], dN)
        if np.any(det <= 0.0):
            bad = sel[np.argwhere(det <= 0.0)[0][0]]
            raise ValueError(f"non-positive Jacobian in element {bad}")
        QW = rule.weights[None, :] * det
        Ke = np.einsum("eq,eqai,ij,eqbj->eab", QW, G, K, G, optimize=True)
        xq = np.einsum("qa,eai->eqi", N, coords[sel])
        fq = np.broadcast_to(
            np.asarray(f(xq[..., 0], xq[..., 1], side), dtype=float), QW.shape)
        Fe = np.einsum("eq,eq,qa->ea", QW, fq, N, optimize=True)
        edof = sel[:, None] * nb + np.arange(nb)[None, :]
        rows.append(np.repeat(edof, nb, axis=1).ravel())
        cols.append(np.tile(edof, (1, nb)).ravel())
        vals.append(Ke.ravel())
        np.add.at(b, edof.ravel(), Fe.ravel())

    for edge in mesh.interior_edges:
        block, dofs = interior_edge_block(mesh, material, params, edge)
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(block.ravel())

    s, w = _edge_quadrature(mesh.order)
    for be in mesh.boundary_edges:
        side = int(mesh.elem_subdomain[be.elem])
        K = _side_tensor(mesh, material, be.elem)
        Nt, Gt = _edge_traces(mesh, be.elem, be.edge, s)
        _, _, normal, length = _edge_frame(mesh, be.elem, be.edge)
        flux = np.einsum("qai,i->qa", Gt @ K.T, normal)
        wq = w * (0.5 * length)
        beta = params.beta0 / length
        block = params.alpha * np.einsum("q,qj,qi->ij", wq, Nt, flux)
        block -= np.einsum("q,qj,qi->ij", wq, flux, Nt)
        block += beta * np.einsum("q,qj,qi->ij", wq, Nt, Nt)
        pts = edge_reference_points(mesh.order, be.edge, s)
        Nv, _, _ = tabulate(mesh.order, pts)
        xe = Nv @ mesh.element_coords(be.elem)
        gq = np.broadcast_to(
            np.asarray(g(xe[:, 0], xe[:, 1], side), dtype=float), wq.shape)
        load = params.alpha * np.einsum("q,q,qi->i", wq, gq, flux)
        load += beta * np.einsum("q,q,qi->i", wq, gq, Nt)
        dofs = be.elem * nb + np.arange(nb)
        rows.append(np.repeat(dofs, nb))
        cols.append(np.tile(dofs, nb))
        vals.append(block.ravel())
        np.add.at(b, dofs, load)

    A = linsolve.compress(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
        (ndof, ndof),
    )
    return LinearSystem(
        matrix=A, rhs=b, symmetric=(params.alpha == -1.0), ndof=ndof,
        free=np.arange(ndof), fixed=np.empty(0, dtype=np.int64),
        fixed_values=np.empty(0),
    )


def evaluate_broken_functional(mesh: QuadMesh, material: MaterialField, f,
                               field: BrokenField) -> float:
    """Energy of a broken potential field:

        1/2 sum_K (K grad q, grad q) - sum_edges int {K grad q . n}[q]
        - sum_K (f, q)

    Boundary terms are omitted (strong Dirichlet setting).  For a field that
    is continuous within each subdomain the edge sum collapses to the
    interface, recovering the two-subdomain extended energy; for a globally
    continuous field it vanishes entirely.
    """
    rule = default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    coords = mesh.all_coords()
    total = 0.0
    for side in (1, 2):
        sel = np.flatnonzero(mesh.elem_subdomain == side)
        if sel.size == 0:
            continue
        K, _ = material.tensors_at(side)
        _, det, G = geometry_batch(coords[sel], dN)
        QW = rule.weights[None, :] * det
        qe = field.coeffs[sel]
        grad = np.einsum("eqai,ea->eqi", G, qe)
        total += 0.5 * np.einsum("eq,eqi,ij,eqj->", QW, grad, K, grad)
        xq = np.einsum("qa,eai->eqi", N, coords[sel])
        fq = np.broadcast_to(
            np.asarray(f(xq[..., 0], xq[..., 1], side), dtype=float), QW.shape)
        vals = np.einsum("qa,ea->eq", N, qe)
        total -= np.einsum("eq,eq,eq->", QW, fq, vals)
    s, w = _edge_quadrature(mesh.order)
    for edge in mesh.interior_edges:
        jump, _, flux_avg = dg_jump_average(mesh, material, edge, field)
        _, _, _, length = _edge_frame(mesh, edge.elem_hi, edge.edge_hi)
        total -= float(np.sum(w * (0.5 * length) * flux_avg * jump))
    return float(total)
