"""Pointwise velocity transmission constraints across a material interface.

At an interface point with unit normal n and tangent tau, the physically
admissible two-sided velocities share the normal component while the
tangential component of resistivity-weighted velocity is continuous:

    u1 . n = u2 . n,        (Lam1 u1) . tau = (Lam2 u2) . tau,

together with a single-valued potential.  Packing both linear conditions into
the 2x2 matrix Q_i = [[(Lam_i tau)^T], [n^T]] per side gives the node-level
velocity map pi = Q1^{-1} Q2 taking side-2 (reference) velocities to side-1
velocities.  Element systems on the side-1 strip along the interface are
transformed with a block-diagonal matrix T carrying pi at the velocity slots
of interface nodes, after which the assembled problem is posed purely in the
reference unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .material import MaterialField
from .mesh import QuadMesh, classify_interface

N_FIELDS = 3  # per-node unknowns: (u_x, u_y, p)


def q_matrix(lam: np.ndarray, normal, tangent) -> np.ndarray:
    """Constraint matrix rows: (Lam tau)^T above n^T.

    For SPD resistivity the determinant has magnitude (Lam tau) . tau > 0,
    so Q is always invertible.
    """
    lam = np.asarray(lam, dtype=float)
    n = np.asarray(normal, dtype=float)
    t = np.asarray(tangent, dtype=float)
    if lam.shape != (2, 2):
        raise ValueError(f"resistivity must be 2x2, got {lam.shape}")
    for v, label in ((n, "normal"), (t, "tangent")):
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ValueError(f"{label} must be a unit vector, got {v}")
    if abs(n @ t) > 1e-10:
        raise ValueError("normal and tangent must be orthogonal")
    return np.array([lam @ t, n])


def pi_node(lam1: np.ndarray, lam2: np.ndarray, normal, tangent) -> np.ndarray:
    """Node-level velocity map pi = Q1^{-1} Q2 (side-2 -> side-1).

    Identity when the two resistivities coincide.  The result satisfies
    (pi w) . n = w . n and Lam1 (pi w) . tau = Lam2 w . tau for every w.
    """
    q1 = q_matrix(lam1, normal, tangent)
    q2 = q_matrix(lam2, normal, tangent)
    return np.linalg.solve(q1, q2)


@dataclass(frozen=True)
class InterfaceTransform:
    """Per-node velocity maps for every node on the interface."""

    node_pi: dict          # node -> 2x2 map (side-2 velocity to side-1)
    node_frame: dict       # node -> (normal, tangent)

    def nodes(self):
        return self.node_pi.keys()


def build_interface_transform(mesh: QuadMesh, material: MaterialField):
    """Velocity maps at every interface node of the mesh; None when the mesh
    has no interface."""
    frames = classify_interface(mesh)
    if not frames:
        return None
    node_pi = {}
    node_frame = {}
    for node, n, t in frames:
        node_pi[node] = pi_node(material.Lam1, material.Lam2, n, t)
        node_frame[node] = (n, t)
    return InterfaceTransform(node_pi=node_pi, node_frame=node_frame)


def element_transform(element_nodes, transform: InterfaceTransform) -> np.ndarray:
    """Block-diagonal element transformation T for per-node (u_x, u_y, p).

    Nodes on the interface contribute diag(pi, 1) blocks; all other nodes
    contribute identity.  An element with no interface nodes therefore gets
    the identity matrix.
    """
    nn = len(element_nodes)
    T = np.eye(N_FIELDS * nn)
    for a, node in enumerate(element_nodes):
        pi = transform.node_pi.get(int(node))
        if pi is not None:
            s = N_FIELDS * a
            T[s:s + 2, s:s + 2] = pi
    return T


def transform_element_system(Ke: np.ndarray, Fe: np.ndarray, T: np.ndarray,
                             mode: str = "symmetric"):
    """Express an element system in reference (side-2) interface unknowns.

    `symmetric` applies T to trial and weighting slots: (T^T Ke T, T^T Fe).
    `nonsymmetric` leaves the weighting functions untransformed: (Ke T, Fe).
    """
    if mode == "symmetric":
        return T.T @ Ke @ T, T.T @ Fe
    if mode == "nonsymmetric":
        return Ke @ T, Fe.copy()
    raise ValueError(f"unknown transform mode {mode!r}")


@dataclass(frozen=True)
class InterfaceTrace:
    """Two-sided nodal state on the interface: (u_x, u_y, p) per side."""

    node: int
    side1: np.ndarray
    side2: np.ndarray


def recover_interface_solution(transform: InterfaceTransform,
                               nodal: np.ndarray):
    """Two-sided interface values from the solved reference unknowns.

    `nodal` is the (n_nodes, 3) array of reference unknowns.  The side-2
    trace is the reference value itself; the side-1 velocity applies pi.
    The recovered pair satisfies the transmission constraints by
    construction.
    """
    traces = []
    for node in sorted(transform.node_pi):
        ref = nodal[node]
        pi = transform.node_pi[node]
        side1 = ref.copy()
        side1[:2] = pi @ ref[:2]
        traces.append(InterfaceTrace(node=node, side1=side1, side2=ref.copy()))
    return traces
