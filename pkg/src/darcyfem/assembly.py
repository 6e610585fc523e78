"""Global assembly of the primal and stabilized mixed Darcy problems.

The mixed solvers use equal-order continuous (u_x, u_y, p) nodal unknowns and
a four-parameter family of stabilized forms

    B({u,p};{v,q}) = (Lam u, v) - (div v, p) - d0 (div u, q)
                   + d1 (kinf (Lam u + grad p), d0 Lam v + grad q)
                   + d2 (lam div u, div v)
                   + d3 (kinf curl(Lam u), curl(Lam v))

    F({v,q})       = -d0 (f, q) + d2 (lam f, div v)

with kinf the global conductivity scale, lam = 1/kinf, and per-subdomain
resistivity Lam.  Three named parameter sets are provided:

    mgls:  d0=+1, d1>0, d2>0, d3=0    (default d1=d2=1/2)
    hvm:   d0=-1, d1=+1/2, d2=0, d3=0
    cgls:  d0=+1, d1=-1/2, d2=1/2, d3=1/2

The form is symmetric exactly when d0=+1.  The normal velocity component is
prescribed on the whole boundary (both components at corners) and the
potential, determined only up to a constant under pure flux data, is pinned
at a single node.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linsolve
from .elements import QuadratureRule, default_rule, geometry_batch, tabulate
from .interface import (InterfaceTransform, element_transform,
                        transform_element_system)
from .material import MaterialField
from .mesh import QuadMesh, boundary_nodes, edge_local_nodes

N_FIELDS = 3

_DUP_TOL = 1e-10


@dataclass(frozen=True)
class StabilizationParams:
    """Weights (delta0..delta3) of the stabilized mixed form."""

    delta0: float
    delta1: float
    delta2: float
    delta3: float
    method: str

    def __post_init__(self):
        d0, d1, d2, d3 = self.delta0, self.delta1, self.delta2, self.delta3
        if self.method == "mgls":
            ok = d0 == 1.0 and d1 > 0.0 and d2 > 0.0 and d3 == 0.0
        elif self.method == "hvm":
            ok = d0 == -1.0 and d1 == 0.5 and d2 == 0.0 and d3 == 0.0
        elif self.method == "cgls":
            ok = d0 == 1.0 and d1 == -0.5 and d2 == 0.5 and d3 == 0.5
        else:
            raise ValueError(f"unknown stabilization method {self.method!r}")
        if not ok:
            raise ValueError(
                f"deltas ({d0}, {d1}, {d2}, {d3}) inconsistent with "
                f"method {self.method!r}"
            )

    @property
    def symmetric(self) -> bool:
        return self.delta0 == 1.0

    @classmethod
    def mgls(cls, delta1: float = 0.5, delta2: float = 0.5):
        return cls(1.0, delta1, delta2, 0.0, "mgls")

    @classmethod
    def hvm(cls):
        return cls(-1.0, 0.5, 0.0, 0.0, "hvm")

    @classmethod
    def cgls(cls):
        return cls(1.0, -0.5, 0.5, 0.5, "cgls")


def params_for(method: str) -> StabilizationParams:
    factory = {"mgls": StabilizationParams.mgls,
               "hvm": StabilizationParams.hvm,
               "cgls": StabilizationParams.cgls}.get(method)
    if factory is None:
        raise ValueError(f"unknown stabilization method {method!r}")
    return factory()


@dataclass(frozen=True)
class DofMap:
    """Node-major global numbering: dof = dofs_per_node * node + component."""

    n_nodes: int
    dofs_per_node: int

    @property
    def ndof(self) -> int:
        return self.n_nodes * self.dofs_per_node

    def dof(self, node: int, comp: int = 0) -> int:
        if not 0 <= comp < self.dofs_per_node:
            raise ValueError(f"component {comp} out of range")
        return self.dofs_per_node * node + comp

    def velocity_dof(self, node: int, comp: int) -> int:
        if self.dofs_per_node != N_FIELDS:
            raise ValueError("velocity dofs exist only in the mixed numbering")
        return self.dof(node, comp)

    def pressure_dof(self, node: int) -> int:
        if self.dofs_per_node != N_FIELDS:
            raise ValueError("pressure dofs exist only in the mixed numbering")
        return self.dof(node, 2)


@dataclass
class LinearSystem:
    """Possibly-reduced sparse system with the embedding into full unknowns."""

    matrix: object            # scipy CSR
    rhs: np.ndarray
    symmetric: bool
    ndof: int                 # size of the full (unreduced) unknown vector
    free: np.ndarray          # full-space indices of the rows/cols kept
    fixed: np.ndarray
    fixed_values: np.ndarray

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        """Scatter a reduced solution back to the full unknown vector."""
        full = np.empty(self.ndof)
        full[self.free] = x_free
        full[self.fixed] = self.fixed_values
        return full


def apply_essential_bc(system: LinearSystem, dofs, values) -> LinearSystem:
    """Eliminate prescribed unknowns, lifting their values to the rhs.

    Duplicate prescriptions of the same unknown are accepted when the values
    agree and rejected otherwise.  Elimination preserves symmetry.  With no
    prescriptions the system is returned unchanged.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if dofs.shape != values.shape:
        raise ValueError("dof and value arrays must have equal length")
    if dofs.size == 0:
        return system
    if system.fixed.size:
        raise ValueError("system already has eliminated unknowns")
    order = np.argsort(dofs, kind="stable")
    dofs, values = dofs[order], values[order]
    keep_d, keep_v = [dofs[0]], [values[0]]
    for d, v in zip(dofs[1:], values[1:]):
        if d == keep_d[-1]:
            if abs(v - keep_v[-1]) > _DUP_TOL * max(1.0, abs(v)):
                raise ValueError(
                    f"conflicting prescriptions for unknown {d}: "
                    f"{keep_v[-1]!r} vs {v!r}"
                )
            continue
        keep_d.append(d)
        keep_v.append(v)
    fixed = np.array(keep_d, dtype=np.int64)
    fixed_values = np.array(keep_v)
    if fixed.min() < 0 or fixed.max() >= system.ndof:
        raise ValueError("prescribed unknown outside system")
    mask = np.ones(system.ndof, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    # free may be empty: prescribing every unknown leaves a 0x0 system whose
    # expanded solution is just the prescription
    A = system.matrix.tocsr()
    rhs = system.rhs[free] - A[free][:, fixed] @ fixed_values
    return LinearSystem(
        matrix=A[free][:, free], rhs=rhs, symmetric=system.symmetric,
        ndof=system.ndof, free=free, fixed=fixed, fixed_values=fixed_values,
    )


def _scatter(edof: np.ndarray, Ke: np.ndarray, Fe: np.ndarray, ndof: int):
    ne, nde = edof.shape
    rows = np.repeat(edof, nde, axis=1).ravel()
    cols = np.tile(edof, (1, nde)).ravel()
    A = linsolve.compress(rows, cols, Ke.ravel(), (ndof, ndof))
    b = np.zeros(ndof)
    np.add.at(b, edof.ravel(), Fe.ravel())
    return A, b


def _eval_coefficient(fn, xq: np.ndarray, side: int) -> np.ndarray:
    """Evaluate a scalar coefficient callable at physical quadrature points."""
    out = np.asarray(fn(xq[..., 0], xq[..., 1], side), dtype=float)
    return np.broadcast_to(out, xq.shape[:-1])


def _node_sides(mesh: QuadMesh) -> np.ndarray:
    """Subdomain tag per node; interface nodes take the reference side 2."""
    sides = np.zeros(mesh.n_nodes, dtype=np.int64)
    for e in range(mesh.n_elements):
        sides[mesh.elements[e]] = mesh.elem_subdomain[e]
    # element loops overwrite shared nodes arbitrarily; fix the interface
    # column to the reference side and everything left of it to side 1
    if mesh.interface_x is not None:
        sides[mesh.nodes[:, 0] < mesh.interface_x] = 1
        sides[mesh.nodes[:, 0] > mesh.interface_x] = 2
        sides[mesh.interface_nodes] = 2
    return sides


def assemble_galerkin(mesh: QuadMesh, material: MaterialField, f, g,
                      rule: QuadratureRule | None = None) -> LinearSystem:
    """Primal potential problem (K grad p, grad q) = (f, q) with Dirichlet
    data g eliminated at every boundary node.

    f and g are callables (x, y, side) -> value.  Returns the reduced system.
    """
    rule = rule or default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    coords = mesh.all_coords()
    dof = DofMap(mesh.n_nodes, 1)
    ndof = dof.ndof
    rows_all, cols_all, vals_all = [], [], []
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
        fq = _eval_coefficient(f, xq, side)
        Fe = np.einsum("eq,eq,qa->ea", QW, fq, N, optimize=True)
        edof = mesh.elements[sel]
        rows_all.append(np.repeat(edof, edof.shape[1], axis=1).ravel())
        cols_all.append(np.tile(edof, (1, edof.shape[1])).ravel())
        vals_all.append(Ke.ravel())
        np.add.at(b, edof.ravel(), Fe.ravel())
    A = linsolve.compress(
        np.concatenate(rows_all), np.concatenate(cols_all),
        np.concatenate(vals_all), (ndof, ndof),
    )
    system = LinearSystem(
        matrix=A, rhs=b, symmetric=True, ndof=ndof,
        free=np.arange(ndof), fixed=np.empty(0, dtype=np.int64),
        fixed_values=np.empty(0),
    )
    sides = _node_sides(mesh)
    bnodes = sorted(boundary_nodes(mesh))
    if not bnodes:
        raise ValueError("mesh has no boundary edges")
    xy = mesh.nodes[bnodes]
    gvals = [float(g(xy[i, 0], xy[i, 1], int(sides[n])))
             for i, n in enumerate(bnodes)]
    return apply_essential_bc(system, np.array(bnodes), np.array(gvals))


def darcy_velocity_from_potential(mesh: QuadMesh, material: MaterialField,
                                  p_nodal: np.ndarray,
                                  rule: QuadratureRule | None = None):
    """Direct velocity u = -K grad p_h of a nodal potential field.

    Returns (points, values): physical quadrature points (ne, nq, 2) and the
    elementwise velocity there.  The field is discontinuous across element
    boundaries.
    """
    rule = rule or default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    coords = mesh.all_coords()
    p_nodal = np.asarray(p_nodal, dtype=float)
    if p_nodal.shape != (mesh.n_nodes,):
        raise ValueError(
            f"potential must have one value per node, got {p_nodal.shape}"
        )
    points = np.einsum("qa,eai->eqi", N, coords)
    values = np.empty_like(points)
    for side in (1, 2):
        sel = np.flatnonzero(mesh.elem_subdomain == side)
        if sel.size == 0:
            continue
        K, _ = material.tensors_at(side)
        _, _, G = geometry_batch(coords[sel], dN)
        grad_p = np.einsum("eqai,ea->eqi", G, p_nodal[mesh.elements[sel]])
        values[sel] = -np.einsum("ij,eqj->eqi", K, grad_p)
    return points, values


def _mixed_element_matrices(QW, N, G, xq, lam_tensor, kinf, lam,
                            params: StabilizationParams, f, side):
    """Element matrices and load vectors of the stabilized form for one
    subdomain batch."""
    ne, nq = QW.shape
    nb = N.shape[1]
    nde = N_FIELDS * nb
    d0, d1, d2, d3 = params.delta0, params.delta1, params.delta2, params.delta3
    Ke = np.zeros((ne, nde, nde))
    Fe = np.zeros((ne, nde))

    M = np.einsum("eq,qa,qb->eab", QW, N, N, optimize=True)
    D = [np.einsum("eq,eqa,qb->eab", QW, G[..., c], N, optimize=True)
         for c in (0, 1)]
    GG = {}
    for c in (0, 1):
        for d in (0, 1):
            GG[c, d] = np.einsum("eq,eqa,eqb->eab", QW, G[..., c], G[..., d],
                                 optimize=True)
    lam2 = lam_tensor @ lam_tensor

    for c in (0, 1):
        for d in (0, 1):
            block = lam_tensor[c, d] * M
            block += d1 * kinf * d0 * lam2[c, d] * M
            block += d2 * lam * GG[c, d]
            Ke[:, c::N_FIELDS, d::N_FIELDS] += block
        # velocity test row, potential trial column
        vp = -D[c]
        vp += d1 * kinf * d0 * (lam_tensor[0, c] * D[0].transpose(0, 2, 1)
                                + lam_tensor[1, c] * D[1].transpose(0, 2, 1))
        Ke[:, c::N_FIELDS, 2::N_FIELDS] += vp
        # potential test row, velocity trial column
        pv = -d0 * D[c].transpose(0, 2, 1)
        pv += d1 * kinf * (lam_tensor[0, c] * D[0] + lam_tensor[1, c] * D[1])
        Ke[:, 2::N_FIELDS, c::N_FIELDS] += pv
    Ke[:, 2::N_FIELDS, 2::N_FIELDS] += d1 * kinf * (GG[0, 0] + GG[1, 1])

    if d3 != 0.0:
        # scalar curl of the resistivity-weighted velocity basis
        C = [lam_tensor[1, d] * G[..., 0] - lam_tensor[0, d] * G[..., 1]
             for d in (0, 1)]
        for c in (0, 1):
            for d in (0, 1):
                Ke[:, c::N_FIELDS, d::N_FIELDS] += d3 * kinf * np.einsum(
                    "eq,eqa,eqb->eab", QW, C[c], C[d], optimize=True)

    fq = _eval_coefficient(f, xq, side)
    Fe[:, 2::N_FIELDS] += -d0 * np.einsum("eq,eq,qa->ea", QW, fq, N,
                                          optimize=True)
    if d2 != 0.0:
        for c in (0, 1):
            Fe[:, c::N_FIELDS] += d2 * lam * np.einsum(
                "eq,eq,eqa->ea", QW, fq, G[..., c], optimize=True)
    return Ke, Fe


def assemble_stabilized_mixed(
    mesh: QuadMesh,
    material: MaterialField,
    params: StabilizationParams,
    f,
    velocity_bc,
    pressure_pin=None,
    transform: InterfaceTransform | None = None,
    transform_mode: str = "symmetric",
    rule: QuadratureRule | None = None,
) -> LinearSystem:
    """Assemble the stabilized mixed system with essential flux data.

    f : callable (x, y, side) -> source value.
    velocity_bc : callable (x, y, side) -> (2,) exact boundary velocity; at
        each boundary node the components normal to the incident boundary
        faces are prescribed (both components at corners).  Interface nodes
        on the boundary are evaluated on the reference side 2.
    pressure_pin : optional (node, value) removing the constant-potential
        null mode.  Without it the reduced system is singular and the solve
        will report it.
    transform : optional interface velocity maps; element systems in the
        subdomain-1 strip along the interface are rewritten in reference
        unknowns, with the weighting functions transformed too
        (transform_mode="symmetric") or left untouched ("nonsymmetric").
    """
    rule = rule or default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    coords = mesh.all_coords()
    dof = DofMap(mesh.n_nodes, N_FIELDS)
    ndof = dof.ndof
    nde = N_FIELDS * N.shape[1]

    Ke_all = np.zeros((mesh.n_elements, nde, nde))
    Fe_all = np.zeros((mesh.n_elements, nde))
    for side in (1, 2):
        sel = np.flatnonzero(mesh.elem_subdomain == side)
        if sel.size == 0:
            continue
        _, lam_tensor = material.tensors_at(side)
        _, det, G = geometry_batch(coords[sel], dN)
        if np.any(det <= 0.0):
            bad = sel[np.argwhere(det <= 0.0)[0][0]]
            raise ValueError(f"non-positive Jacobian in element {bad}")
        QW = rule.weights[None, :] * det
        xq = np.einsum("qa,eai->eqi", N, coords[sel])
        Ke, Fe = _mixed_element_matrices(
            QW, N, G, xq, lam_tensor, material.kinf, material.lam,
            params, f, side)
        Ke_all[sel] = Ke
        Fe_all[sel] = Fe

    symmetric = params.symmetric
    if transform is not None:
        iface = set(transform.node_pi)
        for e in np.flatnonzero(mesh.elem_subdomain == 1):
            enodes = mesh.elements[e]
            if not iface.intersection(enodes.tolist()):
                continue
            T = element_transform(enodes, transform)
            Ke_all[e], Fe_all[e] = transform_element_system(
                Ke_all[e], Fe_all[e], T, transform_mode)
        if transform_mode == "nonsymmetric":
            symmetric = False

    edof = (N_FIELDS * mesh.elements[:, :, None]
            + np.arange(N_FIELDS)[None, None, :]).reshape(mesh.n_elements, nde)
    A, b = _scatter(edof, Ke_all, Fe_all, ndof)
    system = LinearSystem(
        matrix=A, rhs=b, symmetric=symmetric, ndof=ndof,
        free=np.arange(ndof), fixed=np.empty(0, dtype=np.int64),
        fixed_values=np.empty(0),
    )

    sides = _node_sides(mesh)
    # Interface endpoints on the outer boundary need both components pinned
    # when the interface map is active: the reference normal dof alone leaves
    # a transformed test function with nonzero normal trace on the wall,
    # which pollutes the whole field at O(h).  Both values are known exactly
    # there, same as at corners.
    pinned_full = set(mesh.interface_nodes) if transform is not None else set()
    con_dofs, con_vals = [], []
    for node, normals in sorted(boundary_nodes(mesh).items()):
        x, y = mesh.nodes[node]
        uval = np.asarray(velocity_bc(x, y, int(sides[node])), dtype=float)
        if node in pinned_full:
            comps = (0, 1)
        else:
            comps = tuple(int(np.argmax(np.abs(n))) for n in normals)
        for comp in comps:
            con_dofs.append(dof.velocity_dof(node, comp))
            con_vals.append(uval[comp])
    if pressure_pin is not None:
        node, value = pressure_pin
        con_dofs.append(dof.pressure_dof(int(node)))
        con_vals.append(float(value))
    return apply_essential_bc(system, np.array(con_dofs), np.array(con_vals))
