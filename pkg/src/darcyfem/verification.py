"""Benchmark problems, discrete-field evaluation, error norms and
convergence studies.

The heterogeneous benchmark (`crumpton_problem`) poses Darcy flow on
[-1, 1]^2 with identity conductivity left of x = 0 and the full anisotropic
tensor gamma [[2, 1], [1, 2]] to the right.  The exact potential is

    p(x, y) = gamma (2 sin y + cos y) x + sin y     (x <= 0)
    p(x, y) = exp(x) sin y                          (x >= 0)

whose velocity crosses the interface with a continuous normal component and
a jump in the tangential component; sources follow from the divergence.  The
homogeneous benchmark (`smooth_problem`) uses the harmonic exp(x) sin y with
unit conductivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linsolve
from .assembly import (assemble_galerkin, assemble_stabilized_mixed,
                       params_for)
from .dg import BrokenField, DGParams, assemble_dg, default_beta0
from .elements import default_rule, geometry_batch, tabulate
from .interface import (InterfaceTransform, build_interface_transform,
                        element_transform, recover_interface_solution)
from .material import MaterialField, crumpton_material, identity_material
from .mesh import QuadMesh, build_structured_mesh

MIXED_METHODS = ("mgls", "hvm", "cgls")
INTERFACE_MODES = ("continuous", "constrained", "constrained_ns")
CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class ProblemSpec:
    """Manufactured problem: exact fields and data as (x, y, side) callables."""

    name: str
    material: MaterialField
    interface_x: float | None
    p: object   # (x, y, side) -> potential
    u: object   # (x, y, side) -> velocity, trailing axis 2
    f: object   # (x, y, side) -> source

    def velocity_bc(self, x, y, side):
        return self.u(x, y, side)


def crumpton_problem(gamma: float = 1.0) -> ProblemSpec:
    """Heterogeneous anisotropic benchmark with the interface at x = 0."""
    material = crumpton_material(gamma)
    g = float(gamma)

    def p(x, y, side):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if side == 1:
            return g * (2.0 * np.sin(y) + np.cos(y)) * x + np.sin(y)
        return np.exp(x) * np.sin(y)

    def u(x, y, side):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if side == 1:
            ux = -g * (2.0 * np.sin(y) + np.cos(y)) * np.ones_like(x)
            uy = -(g * (2.0 * np.cos(y) - np.sin(y)) * x + np.cos(y))
        else:
            ux = -g * np.exp(x) * (2.0 * np.sin(y) + np.cos(y))
            uy = -g * np.exp(x) * (np.sin(y) + 2.0 * np.cos(y))
        return np.stack([ux, uy], axis=-1)

    def f(x, y, side):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if side == 1:
            return g * (2.0 * np.sin(y) + np.cos(y)) * x + np.sin(y)
        return -2.0 * g * np.exp(x) * np.cos(y)

    return ProblemSpec(name=f"crumpton(gamma={g:g})", material=material,
                       interface_x=0.0, p=p, u=u, f=f)


def smooth_problem() -> ProblemSpec:
    """Homogeneous benchmark: unit conductivity, harmonic exp(x) sin y."""
    material = identity_material()

    def p(x, y, side):
        return np.exp(np.asarray(x, dtype=float)) * np.sin(y)

    def u(x, y, side):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ex = np.exp(x)
        return np.stack([-ex * np.sin(y), -ex * np.cos(y)], axis=-1)

    def f(x, y, side):
        return np.zeros_like(np.asarray(x, dtype=float))

    return ProblemSpec(name="smooth", material=material, interface_x=None,
                       p=p, u=u, f=f)


def verify_problem_consistency(problem: ProblemSpec, n_samples: int = 1000,
                               seed: int = 0, tol: float = 1e-8,
                               bounds=(-1.0, 1.0, -1.0, 1.0)) -> float:
    """Finite-difference self-check of a manufactured problem.

    Samples random points in each open subdomain away from the interface and
    verifies u = -K grad p and div u = f by central differences.  Returns the
    largest deviation found; raises if it exceeds `tol`.
    """
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = bounds
    step = 1e-5
    margin = 1e-3
    worst = 0.0
    xi = problem.interface_x
    for side in (1, 2):
        if xi is None:
            lo, hi = x0 + margin, x1 - margin
        elif side == 1:
            lo, hi = x0 + margin, xi - margin
        else:
            lo, hi = xi + margin, x1 - margin
        if hi <= lo:
            continue
        xs = rng.uniform(lo, hi, n_samples)
        ys = rng.uniform(y0 + margin, y1 - margin, n_samples)
        K, _ = problem.material.tensors_at(side)
        px = (problem.p(xs + step, ys, side) - problem.p(xs - step, ys, side)) / (2 * step)
        py = (problem.p(xs, ys + step, side) - problem.p(xs, ys - step, side)) / (2 * step)
        grad = np.stack([px, py], axis=-1)
        u = problem.u(xs, ys, side)
        worst = max(worst, float(np.abs(u + grad @ K.T).max()))
        dux = (problem.u(xs + step, ys, side)[..., 0]
               - problem.u(xs - step, ys, side)[..., 0]) / (2 * step)
        duy = (problem.u(xs, ys + step, side)[..., 1]
               - problem.u(xs, ys - step, side)[..., 1]) / (2 * step)
        worst = max(worst, float(np.abs(dux + duy - problem.f(xs, ys, side)).max()))
        if xi is None:
            break
    if xi is not None:
        ys = rng.uniform(y0, y1, n_samples)
        p_jump = problem.p(xi, ys, 1) - problem.p(xi, ys, 2)
        un_jump = problem.u(xi, ys, 1)[..., 0] - problem.u(xi, ys, 2)[..., 0]
        worst = max(worst, float(np.abs(p_jump).max()),
                    float(np.abs(un_jump).max()))
    if worst > tol:
        raise ValueError(
            f"problem {problem.name} fails its consistency check: "
            f"deviation {worst:.3e} > {tol:.1e}"
        )
    return worst


def _batched_hessians(d2N: np.ndarray, jac0: np.ndarray) -> np.ndarray:
    """Physical second derivatives (xx, xy, yy) for a batch of affine
    elements; `jac0` holds one constant Jacobian per element."""
    inv = np.linalg.inv(jac0)
    h_ref = np.empty(d2N.shape[:-1] + (2, 2))
    h_ref[..., 0, 0] = d2N[..., 0]
    h_ref[..., 0, 1] = d2N[..., 1]
    h_ref[..., 1, 0] = d2N[..., 1]
    h_ref[..., 1, 1] = d2N[..., 2]
    h_phys = np.einsum("eki,qakl,elj->eqaij", inv, h_ref, inv)
    out = np.empty(h_phys.shape[:3] + (3,))
    out[..., 0] = h_phys[..., 0, 0]
    out[..., 1] = h_phys[..., 0, 1]
    out[..., 2] = h_phys[..., 1, 1]
    return out


def _gradient_divergence(K, d2N, jac, pe):
    """Divergence of -K grad p_h per element batch (affine maps)."""
    hess = _batched_hessians(d2N, jac[:, 0])
    hp = np.einsum("eqac,ea->eqc", hess, pe)
    return -(K[0, 0] * hp[..., 0] + (K[0, 1] + K[1, 0]) * hp[..., 1]
             + K[1, 1] * hp[..., 2])


class PrimalSolution:
    """Continuous nodal potential with direct velocity -K grad p_h.

    Second derivatives (for the velocity divergence) assume affine element
    maps, which holds on the structured rectangular meshes.
    """

    def __init__(self, mesh: QuadMesh, material: MaterialField,
                 p_nodal: np.ndarray):
        self.mesh = mesh
        self.material = material
        self.p_nodal = np.asarray(p_nodal, dtype=float)

    def evaluate(self, ref_points: np.ndarray):
        mesh = self.mesh
        N, dN, d2N = tabulate(mesh.order, ref_points)
        coords = mesh.all_coords()
        pe = self.p_nodal[mesh.elements]
        nq = N.shape[0]
        p = np.einsum("qa,ea->eq", N, pe)
        u = np.empty((mesh.n_elements, nq, 2))
        divu = np.empty((mesh.n_elements, nq))
        for side in (1, 2):
            sel = np.flatnonzero(mesh.elem_subdomain == side)
            if sel.size == 0:
                continue
            K, _ = self.material.tensors_at(side)
            jac, _, G = geometry_batch(coords[sel], dN)
            grad = np.einsum("eqai,ea->eqi", G, pe[sel])
            u[sel] = -np.einsum("ij,eqj->eqi", K, grad)
            divu[sel] = _gradient_divergence(K, d2N, jac, pe[sel])
        return p, u, divu

    def nodal_state(self):
        return self.p_nodal


class MixedSolution:
    """Equal-order nodal (u_x, u_y, p) field in reference unknowns.

    When the solve used interface transforms, elements in the subdomain-1
    strip along the interface recover their physical values through the
    per-element transformation before evaluation.
    """

    def __init__(self, mesh: QuadMesh, nodal: np.ndarray,
                 transform: InterfaceTransform | None = None):
        self.mesh = mesh
        self.nodal = np.asarray(nodal, dtype=float).reshape(mesh.n_nodes, 3)
        self.transform = transform

    def element_dofs(self) -> np.ndarray:
        """Per-element physical dof values, (n_elements, 3 n_basis)."""
        mesh = self.mesh
        vals = self.nodal[mesh.elements].reshape(mesh.n_elements, -1)
        if self.transform is not None:
            iface = set(self.transform.node_pi)
            for e in np.flatnonzero(mesh.elem_subdomain == 1):
                enodes = mesh.elements[e]
                if not iface.intersection(enodes.tolist()):
                    continue
                T = element_transform(enodes, self.transform)
                vals[e] = T @ vals[e]
        return vals

    def evaluate(self, ref_points: np.ndarray):
        mesh = self.mesh
        N, dN, _ = tabulate(mesh.order, ref_points)
        coords = mesh.all_coords()
        vals = self.element_dofs().reshape(mesh.n_elements, -1, 3)
        _, _, G = geometry_batch(coords, dN)
        p = np.einsum("qa,ea->eq", N, vals[..., 2])
        u = np.stack([np.einsum("qa,ea->eq", N, vals[..., 0]),
                      np.einsum("qa,ea->eq", N, vals[..., 1])], axis=-1)
        divu = (np.einsum("eqa,ea->eq", G[..., 0], vals[..., 0])
                + np.einsum("eqa,ea->eq", G[..., 1], vals[..., 1]))
        return p, u, divu

    def interface_traces(self):
        if self.transform is None:
            return []
        return recover_interface_solution(self.transform, self.nodal)


class BrokenSolution:
    """Elementwise potential with direct velocity, for the broken solver."""

    def __init__(self, mesh: QuadMesh, material: MaterialField,
                 field: BrokenField):
        self.mesh = mesh
        self.material = material
        self.field = field

    def evaluate(self, ref_points: np.ndarray):
        mesh = self.mesh
        N, dN, d2N = tabulate(mesh.order, ref_points)
        coords = mesh.all_coords()
        pe = self.field.coeffs
        nq = N.shape[0]
        p = np.einsum("qa,ea->eq", N, pe)
        u = np.empty((mesh.n_elements, nq, 2))
        divu = np.empty((mesh.n_elements, nq))
        for side in (1, 2):
            sel = np.flatnonzero(mesh.elem_subdomain == side)
            if sel.size == 0:
                continue
            K, _ = self.material.tensors_at(side)
            jac, _, G = geometry_batch(coords[sel], dN)
            grad = np.einsum("eqai,ea->eqi", G, pe[sel])
            u[sel] = -np.einsum("ij,eqj->eqi", K, grad)
            divu[sel] = _gradient_divergence(K, d2N, jac, pe[sel])
        return p, u, divu


@dataclass(frozen=True)
class ErrorEntry:
    err_p: float
    err_u: float
    err_divu: float


def l2_errors(mesh: QuadMesh, solution, problem: ProblemSpec,
              rule=None) -> ErrorEntry:
    """Global L2 errors of potential, velocity and velocity divergence.

    Exact fields are evaluated per element on the element's own subdomain, so
    two-sided interface values never mix.
    """
    rule = rule or default_rule(mesh.order)
    N, dN, _ = tabulate(mesh.order, rule.points)
    coords = mesh.all_coords()
    _, det, _ = geometry_batch(coords, dN)
    QW = rule.weights[None, :] * det
    xq = np.einsum("qa,eai->eqi", N, coords)
    p_h, u_h, div_h = solution.evaluate(rule.points)
    acc_p = acc_u = acc_d = 0.0
    for side in (1, 2):
        sel = np.flatnonzero(mesh.elem_subdomain == side)
        if sel.size == 0:
            continue
        x, y = xq[sel, :, 0], xq[sel, :, 1]
        p_ex = problem.p(x, y, side)
        u_ex = problem.u(x, y, side)
        f_ex = problem.f(x, y, side)
        acc_p += float(np.sum(QW[sel] * (p_h[sel] - p_ex) ** 2))
        acc_u += float(np.sum(QW[sel, :, None] * (u_h[sel] - u_ex) ** 2))
        acc_d += float(np.sum(QW[sel] * (div_h[sel] - f_ex) ** 2))
    return ErrorEntry(err_p=math.sqrt(acc_p), err_u=math.sqrt(acc_u),
                      err_divu=math.sqrt(acc_d))


def fit_rate(h: np.ndarray, err: np.ndarray) -> np.ndarray:
    """Pairwise convergence rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}).

    Requires strictly positive errors and strictly decreasing mesh sizes.
    """
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    if h.shape != err.shape or h.ndim != 1 or h.size < 2:
        raise ValueError("need matching 1-d arrays with at least two entries")
    if np.any(h <= 0) or np.any(err <= 0):
        raise ValueError("mesh sizes and errors must be positive")
    if np.any(np.diff(h) >= 0):
        raise ValueError("mesh sizes must be strictly decreasing")
    return np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])


@dataclass
class SingleRun:
    """One assembled-and-solved configuration."""

    mesh: QuadMesh
    solution: object
    residual: float
    method: str
    order: int
    interface_mode: str
    constraint_violation: float = 0.0


def _check_interface_constraints(material: MaterialField, traces) -> float:
    """Largest violation of the transmission constraints over recovered
    two-sided interface values."""
    worst = 0.0
    for tr in traces:
        u1, u2 = tr.side1[:2], tr.side2[:2]
        worst = max(worst, abs(u1[0] - u2[0]))  # normal component, n = (1, 0)
        t1 = material.Lam1 @ u1
        t2 = material.Lam2 @ u2
        worst = max(worst, abs(t1[1] - t2[1]))  # tangential, tau = (0, 1)
        worst = max(worst, abs(tr.side1[2] - tr.side2[2]))
    return worst


def solve_single(method: str, order: int, n: int, problem: ProblemSpec,
                 interface_mode: str = "continuous",
                 dg_params: DGParams | None = None,
                 bounds=(-1.0, 1.0, -1.0, 1.0)) -> SingleRun:
    """Build the mesh, assemble, solve and wrap one configuration.

    `method` is galerkin, mgls, hvm, cgls or dg; mixed methods accept the
    constrained interface modes.  The potential pin for mixed methods sits at
    the first node (lower-left corner) with its exact value.
    """
    if interface_mode not in INTERFACE_MODES:
        raise ValueError(f"unknown interface mode {interface_mode!r}")
    if interface_mode != "continuous" and method not in MIXED_METHODS:
        raise ValueError(
            f"interface mode {interface_mode!r} applies only to mixed methods"
        )
    mesh = build_structured_mesh(n, n, bounds=bounds,
                                 interface_x=problem.interface_x, order=order)
    material = problem.material
    if method == "galerkin":
        system = assemble_galerkin(mesh, material, problem.f, problem.p)
        x, residual = linsolve.solve(system.matrix, system.rhs,
                                     system.symmetric)
        solution = PrimalSolution(mesh, material, system.expand(x))
        return SingleRun(mesh=mesh, solution=solution, residual=residual,
                         method=method, order=order,
                         interface_mode=interface_mode)
    if method == "dg":
        params = dg_params or DGParams(alpha=-1.0, beta0=default_beta0(order))
        system = assemble_dg(mesh, material, problem.f, params, problem.p)
        x, residual = linsolve.solve(system.matrix, system.rhs,
                                     system.symmetric)
        field = BrokenField(coeffs=x.reshape(mesh.n_elements, -1))
        solution = BrokenSolution(mesh, material, field)
        return SingleRun(mesh=mesh, solution=solution, residual=residual,
                         method=method, order=order,
                         interface_mode=interface_mode)
    if method not in MIXED_METHODS:
        raise ValueError(f"unknown method {method!r}")
    if dg_params is not None:
        raise ValueError("dg parameters apply only to the dg method")

    params = params_for(method)
    transform = None
    transform_mode = "symmetric"
    if interface_mode != "continuous":
        transform = build_interface_transform(mesh, material)
        if transform is None:
            raise ValueError(
                "constrained interface mode requires a mesh with an interface"
            )
        if interface_mode == "constrained_ns":
            transform_mode = "nonsymmetric"
    pin_node = 0
    x0, y0 = mesh.nodes[pin_node]
    pin_side = 1 if (problem.interface_x is None or x0 < problem.interface_x) else 2
    pin_value = float(problem.p(x0, y0, pin_side))
    system = assemble_stabilized_mixed(
        mesh, material, params, problem.f, problem.velocity_bc,
        pressure_pin=(pin_node, pin_value), transform=transform,
        transform_mode=transform_mode,
    )
    x, residual = linsolve.solve(system.matrix, system.rhs, system.symmetric)
    solution = MixedSolution(mesh, system.expand(x), transform=transform)
    violation = 0.0
    if transform is not None:
        violation = _check_interface_constraints(
            material, solution.interface_traces())
    return SingleRun(mesh=mesh, solution=solution, residual=residual,
                     method=method, order=order, interface_mode=interface_mode,
                     constraint_violation=violation)


@dataclass
class ErrorReport:
    n: int
    h: float
    err_p: float
    err_u: float
    err_divu: float
    rate_p: float | None = None
    rate_u: float | None = None
    rate_divu: float | None = None


def convergence_study(method: str, order: int, sizes, problem: ProblemSpec,
                      interface_mode: str = "continuous",
                      dg_params: DGParams | None = None,
                      collect=None) -> list:
    """Solve a refinement sequence and tabulate errors with pairwise rates.

    `sizes` must be strictly increasing element counts per direction.  Rates
    are attached to the finer row of each consecutive pair; the coarsest row
    carries none.  Solver failures are re-raised with the offending mesh in
    the message.  `collect`, when given, receives every SingleRun.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 1 or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"mesh sizes must be strictly increasing, got {sizes}")
    x0, x1 = -1.0, 1.0
    reports = []
    for n in sizes:
        try:
            run = solve_single(method, order, n, problem,
                               interface_mode=interface_mode,
                               dg_params=dg_params)
        except linsolve.SolverError as exc:
            raise linsolve.SolverError(
                f"solve failed on mesh {n}x{n} for {method}: {exc}") from exc
        if collect is not None:
            collect(run)
        errs = l2_errors(run.mesh, run.solution, problem)
        h = (x1 - x0) / n
        reports.append(ErrorReport(n=n, h=h, err_p=errs.err_p,
                                   err_u=errs.err_u, err_divu=errs.err_divu))
    for prev, cur in zip(reports, reports[1:]):
        ratio = math.log(prev.h / cur.h)
        for field in ("p", "u", "divu"):
            e0 = getattr(prev, f"err_{field}")
            e1 = getattr(cur, f"err_{field}")
            if e0 > 0.0 and e1 > 0.0:
                setattr(cur, f"rate_{field}", math.log(e0 / e1) / ratio)
    return reports
