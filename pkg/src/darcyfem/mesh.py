"""Structured quadrilateral meshes on a rectangle with an optional vertical
material interface aligned to a mesh line.

Node numbering is lexicographic by (y, x): x runs fastest, rows of constant y
are stacked bottom to top.  Element connectivity is counterclockwise starting
at the lower-left corner; 9-node elements append mid-edge nodes (bottom,
right, top, left) and the centroid.  The subdomain left of the interface is
tagged 1, the right one 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elements import n_basis

# Local corner pairs bounding each element edge, counterclockwise:
# bottom, right, top, left.
EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))
# Mid-edge local node of each edge on 9-node elements.
EDGE_MID = (4, 5, 6, 7)

_ALIGN_TOL = 1e-9


def edge_local_nodes(order: int, edge: int):
    """Local node indices lying on one element edge, in edge direction."""
    if not 0 <= edge < 4:
        raise ValueError(f"edge index {edge} outside 0..3")
    a, b = EDGE_CORNERS[edge]
    if order == 1:
        return (a, b)
    return (a, b, EDGE_MID[edge])


@dataclass(frozen=True)
class BoundaryEdge:
    elem: int
    edge: int            # local edge index in the element
    normal: np.ndarray   # outward unit normal


@dataclass(frozen=True)
class InteriorEdge:
    """Shared edge between two elements; `hi` is the higher element index."""

    elem_hi: int
    elem_lo: int
    edge_hi: int
    edge_lo: int


@dataclass(frozen=True)
class InterfaceEdge:
    """Edge on the material interface, oriented from subdomain 1 into 2."""

    elem_left: int       # subdomain-1 element
    elem_right: int      # subdomain-2 element
    edge_left: int
    edge_right: int
    normal: np.ndarray   # unit normal pointing from subdomain 1 into 2
    tangent: np.ndarray  # normal rotated +90 degrees


@dataclass(frozen=True)
class QuadMesh:
    order: int
    nx: int
    ny: int
    bounds: tuple
    interface_x: float | None
    nodes: np.ndarray            # (n_nodes, 2)
    elements: np.ndarray         # (n_elements, n_basis)
    elem_subdomain: np.ndarray   # (n_elements,), 1 or 2
    boundary_edges: tuple
    interior_edges: tuple
    interface_nodes: np.ndarray  # node indices on the interface line
    interface_edges: tuple

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def cell_size(self) -> tuple:
        x0, x1, y0, y1 = self.bounds
        return ((x1 - x0) / self.nx, (y1 - y0) / self.ny)

    def element_coords(self, elem: int) -> np.ndarray:
        return self.nodes[self.elements[elem]]

    def all_coords(self) -> np.ndarray:
        """Nodal coordinates gathered per element, (n_elements, n_basis, 2)."""
        return self.nodes[self.elements]


def build_structured_mesh(
    nx: int,
    ny: int,
    bounds=(-1.0, 1.0, -1.0, 1.0),
    interface_x: float | None = 0.0,
    order: int = 1,
) -> QuadMesh:
    """Build an nx-by-ny structured quadrilateral mesh.

    `bounds` is (x0, x1, y0, y1).  When `interface_x` lies strictly inside
    (x0, x1) it must coincide with a vertical mesh line; elements to its left
    are tagged subdomain 1 and to its right subdomain 2, and the interface
    node and edge lists are populated.  An `interface_x` of None or outside
    the rectangle yields a homogeneous mesh (every element tagged by side,
    no interface entities).
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"mesh extents must be positive, got nx={nx} ny={ny}")
    if order not in (1, 2):
        raise ValueError(f"unsupported element order {order}")
    x0, x1, y0, y1 = bounds
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate bounds {bounds}")

    hx = (x1 - x0) / nx
    interior_interface = interface_x is not None and x0 < interface_x < x1
    if interior_interface:
        ratio = (interface_x - x0) / hx
        col = round(ratio)
        if abs(ratio - col) > _ALIGN_TOL * nx or not 1 <= col <= nx - 1:
            raise ValueError(
                f"interface_x={interface_x} does not coincide with a vertical "
                f"mesh line of the {nx}x{ny} mesh on [{x0},{x1}]"
            )

    # Nodal lattice; order 2 subdivides each cell once in each direction.
    ncx = order * nx + 1
    ncy = order * ny + 1
    xs = np.linspace(x0, x1, ncx)
    ys = np.linspace(y0, y1, ncy)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([X.ravel(), Y.ravel()])  # y-major, x fastest

    def nid(ix, iy):
        return iy * ncx + ix

    nb = n_basis(order)
    elements = np.empty((nx * ny, nb), dtype=np.int64)
    subdomain = np.empty(nx * ny, dtype=np.int64)
    for ey in range(ny):
        for ex in range(nx):
            e = ey * nx + ex
            ix, iy = order * ex, order * ey
            if order == 1:
                elements[e] = (
                    nid(ix, iy), nid(ix + 1, iy),
                    nid(ix + 1, iy + 1), nid(ix, iy + 1),
                )
            else:
                elements[e] = (
                    nid(ix, iy), nid(ix + 2, iy),
                    nid(ix + 2, iy + 2), nid(ix, iy + 2),
                    nid(ix + 1, iy), nid(ix + 2, iy + 1),
                    nid(ix + 1, iy + 2), nid(ix, iy + 1),
                    nid(ix + 1, iy + 1),
                )
            centroid_x = x0 + (ex + 0.5) * hx
            if interface_x is None:
                subdomain[e] = 1
            else:
                subdomain[e] = 1 if centroid_x < interface_x else 2

    boundary, interior = _build_edge_tables(nodes, elements, order)

    if interior_interface:
        iface_nodes = np.flatnonzero(np.abs(nodes[:, 0] - interface_x) <= _ALIGN_TOL * (x1 - x0))
        normal = np.array([1.0, 0.0])
        tangent = np.array([0.0, 1.0])  # normal rotated +90 degrees
        iface_edges = []
        for ie in interior:
            s_hi = subdomain[ie.elem_hi]
            s_lo = subdomain[ie.elem_lo]
            if s_hi == s_lo:
                continue
            if s_hi == 2:
                left, right = ie.elem_lo, ie.elem_hi
                e_left, e_right = ie.edge_lo, ie.edge_hi
            else:
                left, right = ie.elem_hi, ie.elem_lo
                e_left, e_right = ie.edge_hi, ie.edge_lo
            iface_edges.append(
                InterfaceEdge(
                    elem_left=left, elem_right=right,
                    edge_left=e_left, edge_right=e_right,
                    normal=normal, tangent=tangent,
                )
            )
        iface_edges.sort(key=lambda e: e.elem_left)
        iface_edges = tuple(iface_edges)
    else:
        iface_nodes = np.empty(0, dtype=np.int64)
        iface_edges = ()

    for arr in (nodes, elements, subdomain, iface_nodes):
        arr.setflags(write=False)
    return QuadMesh(
        order=order, nx=nx, ny=ny, bounds=tuple(float(v) for v in bounds),
        interface_x=float(interface_x) if interior_interface else None,
        nodes=nodes, elements=elements, elem_subdomain=subdomain,
        boundary_edges=boundary, interior_edges=interior,
        interface_nodes=iface_nodes, interface_edges=iface_edges,
    )


def _build_edge_tables(nodes, elements, order):
    """Classify element edges as boundary or interior by corner-pair matching."""
    seen: dict = {}
    for e in range(elements.shape[0]):
        for l, (a, b) in enumerate(EDGE_CORNERS):
            key = tuple(sorted((elements[e, a], elements[e, b])))
            seen.setdefault(key, []).append((e, l))
    boundary = []
    interior = []
    for key, owners in seen.items():
        if len(owners) == 1:
            (e, l), = owners
            a, b = EDGE_CORNERS[l]
            t = nodes[elements[e, b]] - nodes[elements[e, a]]
            normal = np.array([t[1], -t[0]])
            normal = normal / np.linalg.norm(normal)
            normal.setflags(write=False)
            boundary.append(BoundaryEdge(elem=e, edge=l, normal=normal))
        elif len(owners) == 2:
            (e0, l0), (e1, l1) = owners
            if e0 > e1:
                hi, lo = (e0, l0), (e1, l1)
            else:
                hi, lo = (e1, l1), (e0, l0)
            interior.append(
                InteriorEdge(elem_hi=hi[0], elem_lo=lo[0], edge_hi=hi[1], edge_lo=lo[1])
            )
        else:
            raise ValueError(f"edge {key} shared by more than two elements")
    boundary.sort(key=lambda be: (be.elem, be.edge))
    interior.sort(key=lambda ie: (ie.elem_lo, ie.elem_hi))
    return tuple(boundary), tuple(interior)


def classify_interface(mesh: QuadMesh):
    """Per-node interface frames: list of (node, normal, tangent).

    The normal points from subdomain 1 into subdomain 2 and the tangent is
    the normal rotated +90 degrees; for the vertical interface these are
    (1, 0) and (0, 1).  Empty when the mesh has no interface.
    """
    normal = np.array([1.0, 0.0])
    tangent = np.array([0.0, 1.0])
    return [(int(n), normal.copy(), tangent.copy()) for n in mesh.interface_nodes]


def boundary_nodes(mesh: QuadMesh):
    """Map boundary node -> list of outward unit normals of its boundary edges.

    Corner nodes collect the normals of both incident boundary faces.
    Distinct normals only (collinear edges contribute once).
    """
    found: dict = {}
    for be in mesh.boundary_edges:
        locs = edge_local_nodes(mesh.order, be.edge)
        for a in locs:
            node = int(mesh.elements[be.elem, a])
            normals = found.setdefault(node, [])
            if not any(np.allclose(n, be.normal) for n in normals):
                normals.append(be.normal)
    return found


def dump_mesh(mesh: QuadMesh, path):
    """Write a plain-text listing: nodes as `id x y`, then elements as
    `id n0 n1 ... tag`."""
    with open(path, "w") as out:
        for i, (x, y) in enumerate(mesh.nodes):
            out.write(f"{i} {float(x)!r} {float(y)!r}\n")
        for e in range(mesh.n_elements):
            conn = " ".join(str(int(v)) for v in mesh.elements[e])
            out.write(f"{e} {conn} {int(mesh.elem_subdomain[e])}\n")
