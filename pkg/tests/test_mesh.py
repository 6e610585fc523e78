"""Structured mesh generation: numbering, tags, edge tables, interface."""

import numpy as np
import pytest

from darcyfem.elements import default_rule, geometry_batch, tabulate
from darcyfem.mesh import (
    EDGE_CORNERS,
    boundary_nodes,
    build_structured_mesh,
    classify_interface,
    dump_mesh,
    edge_local_nodes,
)


def test_counts_q1():
    mesh = build_structured_mesh(4, 3)
    assert mesh.n_nodes == 5 * 4
    assert mesh.n_elements == 12
    assert len(mesh.boundary_edges) == 2 * (4 + 3)
    # interior edges: vertical (nx-1)*ny + horizontal nx*(ny-1)
    assert len(mesh.interior_edges) == 3 * 3 + 4 * 2


def test_counts_q2():
    mesh = build_structured_mesh(4, 3, order=2)
    assert mesh.n_nodes == 9 * 7
    assert mesh.n_elements == 12
    assert mesh.elements.shape == (12, 9)


def test_node_numbering_is_lexicographic():
    mesh = build_structured_mesh(2, 2, bounds=(0.0, 2.0, 0.0, 2.0),
                                 interface_x=1.0)
    # y-major, x fastest, uniform unit spacing
    expect = [(x, y) for y in (0.0, 1.0, 2.0) for x in (0.0, 1.0, 2.0)]
    np.testing.assert_allclose(mesh.nodes, expect)
    np.testing.assert_allclose(mesh.cell_size, (1.0, 1.0))


def test_element_connectivity_counterclockwise():
    mesh = build_structured_mesh(2, 2, bounds=(0.0, 2.0, 0.0, 2.0),
                                 interface_x=1.0)
    np.testing.assert_array_equal(mesh.elements[0], [0, 1, 4, 3])
    np.testing.assert_array_equal(mesh.elements[3], [4, 5, 8, 7])


@pytest.mark.parametrize("order", [1, 2])
def test_all_jacobians_positive(order):
    mesh = build_structured_mesh(4, 5, order=order)
    rule = default_rule(order)
    _, dN, _ = tabulate(order, rule.points)
    _, det, _ = geometry_batch(mesh.all_coords(), dN)
    assert np.all(det > 0.0)


def test_subdomain_tags_split_at_interface():
    mesh = build_structured_mesh(4, 2)
    tags = mesh.elem_subdomain.reshape(2, 4)
    np.testing.assert_array_equal(tags, [[1, 1, 2, 2]] * 2)


def test_no_interface_tags_everything_one():
    mesh = build_structured_mesh(4, 4, interface_x=None)
    assert np.all(mesh.elem_subdomain == 1)
    assert mesh.interface_x is None
    assert mesh.interface_nodes.size == 0
    assert mesh.interface_edges == ()


def test_interface_outside_bounds_is_one_sided():
    mesh = build_structured_mesh(4, 4, interface_x=-2.0)
    assert np.all(mesh.elem_subdomain == 2)
    assert mesh.interface_x is None
    assert mesh.interface_nodes.size == 0


@pytest.mark.parametrize("order,expected", [(1, 5), (2, 9)])
def test_interface_nodes_on_the_line(order, expected):
    mesh = build_structured_mesh(4, 4, order=order)
    assert mesh.interface_nodes.size == expected
    np.testing.assert_allclose(mesh.nodes[mesh.interface_nodes, 0], 0.0)
    frames = classify_interface(mesh)
    assert len(frames) == expected
    for node, normal, tangent in frames:
        np.testing.assert_allclose(normal, [1.0, 0.0])
        np.testing.assert_allclose(tangent, [0.0, 1.0])


def test_interface_edges_pair_subdomains():
    mesh = build_structured_mesh(4, 3)
    assert len(mesh.interface_edges) == 3
    for ie in mesh.interface_edges:
        assert mesh.elem_subdomain[ie.elem_left] == 1
        assert mesh.elem_subdomain[ie.elem_right] == 2
        np.testing.assert_allclose(ie.normal, [1.0, 0.0])


def test_misaligned_interface_rejected():
    with pytest.raises(ValueError):
        build_structured_mesh(5, 5)  # x=0 is not a mesh line of 5 columns
    with pytest.raises(ValueError):
        build_structured_mesh(8, 8, interface_x=0.3)
    # but a lattice that carries the line is fine
    mesh = build_structured_mesh(20, 4, interface_x=0.3)
    assert mesh.interface_x == 0.3


def test_degenerate_inputs_rejected():
    with pytest.raises(ValueError):
        build_structured_mesh(0, 4)
    with pytest.raises(ValueError):
        build_structured_mesh(4, 4, bounds=(1.0, -1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        build_structured_mesh(4, 4, order=3)


def test_boundary_nodes_normals():
    mesh = build_structured_mesh(2, 2)
    found = boundary_nodes(mesh)
    assert len(found) == 8  # all but the center node
    corner = found[0]  # lower-left
    assert len(corner) == 2
    mids = {n for n, normals in found.items() if len(normals) == 1}
    assert len(mids) == 4
    np.testing.assert_allclose(sorted(tuple(v) for v in corner),
                               [(-1.0, 0.0), (0.0, -1.0)])


def test_boundary_edge_normals_point_outward():
    mesh = build_structured_mesh(3, 3, bounds=(0.0, 1.0, 0.0, 1.0),
                                 interface_x=None)
    center = np.array([0.5, 0.5])
    for be in mesh.boundary_edges:
        a, b = EDGE_CORNERS[be.edge]
        edge_mid = 0.5 * (mesh.nodes[mesh.elements[be.elem, a]]
                          + mesh.nodes[mesh.elements[be.elem, b]])
        assert np.dot(be.normal, edge_mid - center) > 0.0


def test_edge_local_nodes():
    assert edge_local_nodes(1, 0) == (0, 1)
    assert edge_local_nodes(1, 3) == (3, 0)
    assert edge_local_nodes(2, 1) == (1, 2, 5)
    assert edge_local_nodes(2, 2) == (2, 3, 6)
    with pytest.raises(ValueError):
        edge_local_nodes(1, 4)


def test_interior_edge_labels_ordered():
    mesh = build_structured_mesh(4, 3)
    for ie in mesh.interior_edges:
        assert ie.elem_hi > ie.elem_lo


def test_arrays_are_frozen():
    mesh = build_structured_mesh(2, 2)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 99.0
    with pytest.raises(ValueError):
        mesh.elements[0, 0] = 5


def test_element_coords_view():
    mesh = build_structured_mesh(2, 2, bounds=(0.0, 2.0, 0.0, 2.0),
                                 interface_x=1.0)
    np.testing.assert_allclose(mesh.element_coords(0),
                               [(0, 0), (1, 0), (1, 1), (0, 1)])
    assert mesh.all_coords().shape == (4, 4, 2)


def test_dump_mesh_roundtrip(tmp_path):
    mesh = build_structured_mesh(2, 2)
    path = tmp_path / "mesh.txt"
    dump_mesh(mesh, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == mesh.n_nodes + mesh.n_elements
    first = lines[0].split()
    assert first[0] == "0"
    np.testing.assert_allclose([float(first[1]), float(first[2])], [-1.0, -1.0])
    last = lines[-1].split()
    assert int(last[-1]) == mesh.elem_subdomain[-1]
    assert [int(v) for v in last[1:-1]] == list(mesh.elements[-1])
