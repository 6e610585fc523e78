"""Interior-penalty broken potential solver."""

import numpy as np
import pytest

from darcyfem import linsolve
from darcyfem.dg import (
    BrokenField,
    DGParams,
    assemble_dg,
    broken_from_continuous,
    broken_from_function,
    default_beta0,
    dg_jump_average,
    evaluate_broken_functional,
    interior_edge_block,
)
from darcyfem.material import crumpton_material, identity_material
from darcyfem.mesh import InteriorEdge, build_structured_mesh

# ----------------------------------------------------------------- parameters


def test_penalty_parameter_validation():
    DGParams(alpha=-1.0, beta0=10.0)
    DGParams(alpha=1.0, beta0=0.0)
    with pytest.raises(ValueError):
        DGParams(alpha=0.0, beta0=10.0)
    with pytest.raises(ValueError):
        DGParams(alpha=-1.0, beta0=-1.0)


def test_default_penalty_scale():
    assert default_beta0(1) == 10.0
    assert default_beta0(2) == 40.0


# -------------------------------------------------------------- broken fields


def test_continuous_injection_has_zero_jumps():
    mesh = build_structured_mesh(3, 2, interface_x=None)
    nodal = mesh.nodes[:, 0] + 2.0 * mesh.nodes[:, 1]
    field = broken_from_continuous(mesh, nodal)
    assert field.coeffs.shape == (mesh.n_elements, 4)
    mat = identity_material()
    for edge in mesh.interior_edges:
        jump, _, _ = dg_jump_average(mesh, mat, edge, field)
        np.testing.assert_allclose(jump, 0.0, atol=1e-13)
    with pytest.raises(ValueError):
        broken_from_continuous(mesh, nodal[:-1])


def test_function_injection_keeps_two_sided_values():
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    field = broken_from_function(mesh, lambda x, y, s: np.full_like(x, float(s)))
    np.testing.assert_allclose(field.coeffs[0], 1.0)
    np.testing.assert_allclose(field.coeffs[1], 2.0)
    edge = mesh.interior_edges[0]
    jump, avg, _ = dg_jump_average(mesh, identity_material(), edge, field)
    # hi element sits right of the interface, so the jump is side2 - side1
    np.testing.assert_allclose(jump, 1.0, atol=1e-13)
    np.testing.assert_allclose(avg, 1.5, atol=1e-13)


def test_edge_trace_conventions():
    # two unit cells split at x = 0; the shared-edge normal points out of
    # the higher-numbered (right) element, i.e. towards -x
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    mat = identity_material()
    (edge,) = mesh.interior_edges
    assert (edge.elem_hi, edge.elem_lo) == (1, 0)

    const = BrokenField(coeffs=np.array([[2.0] * 4, [5.0] * 4]))
    jump, avg, flux = dg_jump_average(mesh, mat, edge, const)
    np.testing.assert_allclose(jump, 3.0, atol=1e-13)
    np.testing.assert_allclose(avg, 3.5, atol=1e-13)
    np.testing.assert_allclose(flux, 0.0, atol=1e-13)

    linear = broken_from_continuous(mesh, mesh.nodes[:, 0])
    jump, avg, flux = dg_jump_average(mesh, mat, edge, linear)
    np.testing.assert_allclose(jump, 0.0, atol=1e-13)
    np.testing.assert_allclose(avg, 0.0, atol=1e-13)
    np.testing.assert_allclose(flux, -1.0, atol=1e-13)  # grad x . (-1, 0)


def edge_form_value(block, dofs, trial, test, nb):
    stacked_trial = trial.ravel()[dofs]
    stacked_test = test.ravel()[dofs]
    return stacked_test @ block @ stacked_trial


def test_edge_form_invariant_under_relabeling():
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    mat = crumpton_material(1.0)
    params = DGParams(alpha=-1.0, beta0=7.0)
    (edge,) = mesh.interior_edges
    rng = np.random.default_rng(5)
    trial = rng.standard_normal((2, 4))
    test = rng.standard_normal((2, 4))

    block, dofs = interior_edge_block(mesh, mat, params, edge)
    v1 = edge_form_value(block, dofs, trial, test, 4)

    swapped = InteriorEdge(elem_hi=edge.elem_lo, elem_lo=edge.elem_hi,
                           edge_hi=edge.edge_lo, edge_lo=edge.edge_hi)
    block2, dofs2 = interior_edge_block(mesh, mat, params, swapped)
    v2 = edge_form_value(block2, dofs2, trial, test, 4)
    assert v1 == pytest.approx(v2, abs=1e-12)


def test_edge_block_matches_quadrature_formula():
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    mat = crumpton_material(1.0)
    params = DGParams(alpha=1.0, beta0=3.0)
    (edge,) = mesh.interior_edges
    rng = np.random.default_rng(9)
    trial = rng.standard_normal((2, 4))
    test = rng.standard_normal((2, 4))
    block, dofs = interior_edge_block(mesh, mat, params, edge)
    v_block = edge_form_value(block, dofs, trial, test, 4)

    from darcyfem.elements import gauss_1d
    _, w = gauss_1d(mesh.order + 1)
    jp, _, fp = dg_jump_average(mesh, mat, edge, BrokenField(coeffs=trial))
    jq, _, fq = dg_jump_average(mesh, mat, edge, BrokenField(coeffs=test))
    length = 1.0
    beta = params.beta0 / length
    v_quad = np.sum(w * 0.5 * length * (
        params.alpha * jp * fq - fp * jq + beta * jp * jq))
    assert v_block == pytest.approx(v_quad, abs=1e-12)


# ------------------------------------------------------------ global system


@pytest.mark.parametrize("alpha,expect_sym", [(-1.0, True), (1.0, False)])
def test_system_symmetry_follows_consistency_sign(alpha, expect_sym):
    mesh = build_structured_mesh(4, 4)
    system = assemble_dg(mesh, crumpton_material(1.0),
                         lambda x, y, s: 0.0 * x,
                         DGParams(alpha=alpha, beta0=10.0),
                         lambda x, y, s: 0.0 * x)
    assert system.symmetric is expect_sym
    gap = np.abs((system.matrix - system.matrix.T).toarray()).max()
    assert (gap <= 1e-12) if expect_sym else (gap > 1e-3)


def test_nonnegative_energy_with_positive_consistency_sign():
    # alpha = +1 makes the consistency terms antisymmetric, so the quadratic
    # form collects only broken gradient energy and penalties
    mesh = build_structured_mesh(4, 4)
    system = assemble_dg(mesh, crumpton_material(1.0),
                         lambda x, y, s: 0.0 * x,
                         DGParams(alpha=1.0, beta0=10.0),
                         lambda x, y, s: 0.0 * x)
    A = system.matrix
    rng = np.random.default_rng(123)
    for _ in range(500):
        x = rng.standard_normal(system.ndof)
        x /= np.linalg.norm(x)
        assert x @ (A @ x) > 0.0


@pytest.mark.parametrize("alpha", [-1.0, 1.0])
@pytest.mark.parametrize("order", [1, 2])
def test_broken_solver_reproduces_in_space_solution(alpha, order):
    p_ex = lambda x, y, s: 1.0 + 2.0 * x - y
    mesh = build_structured_mesh(3, 3, order=order, interface_x=None)
    system = assemble_dg(mesh, identity_material(), lambda x, y, s: 0.0 * x,
                         DGParams(alpha=alpha, beta0=default_beta0(order)),
                         p_ex)
    x, _ = linsolve.solve(system.matrix, system.rhs,
                          symmetric=system.symmetric)
    coeffs = x.reshape(mesh.n_elements, -1)
    for e in range(mesh.n_elements):
        xy = mesh.element_coords(e)
        np.testing.assert_allclose(coeffs[e], p_ex(xy[:, 0], xy[:, 1], None),
                                   atol=1e-8)


# ------------------------------------------------------- energy functional


def test_energy_of_continuous_linear_field():
    # q = x, unit conductivity: energy = half the domain area, no source
    mesh = build_structured_mesh(4, 4)
    field = broken_from_continuous(mesh, mesh.nodes[:, 0])
    J = evaluate_broken_functional(mesh, identity_material(),
                                   lambda x, y, s: 0.0 * x, field)
    assert J == pytest.approx(2.0, abs=1e-12)


def test_energy_of_continuous_quadratic_field():
    # q = x^2 with f = -2: J = 8/3 + 8/3
    mesh = build_structured_mesh(4, 4, order=2, interface_x=None)
    field = broken_from_continuous(mesh, mesh.nodes[:, 0] ** 2)
    J = evaluate_broken_functional(mesh, identity_material(),
                                   lambda x, y, s: -2.0 + 0.0 * x, field)
    assert J == pytest.approx(16.0 / 3.0, abs=1e-12)


def test_energy_of_two_sided_field_hand_value():
    # left q = 1, right q = x on [-1,1]x[0,1]: gradient energy 1/2 on the
    # right, interface jump -1 against flux average -1/2 adds -1/2
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    field = broken_from_function(
        mesh, lambda x, y, s: np.ones_like(x) if s == 1 else x)
    J = evaluate_broken_functional(mesh, identity_material(),
                                   lambda x, y, s: 0.0 * x, field)
    assert J == pytest.approx(0.0, abs=1e-13)


def test_energy_of_heterogeneous_two_sided_field_hand_value():
    # left q = 3x + 2 (unit tensor), right q = x (benchmark tensor):
    # 4.5 + 1 from the gradients, -5 from the interface term
    mesh = build_structured_mesh(2, 1, bounds=(-1.0, 1.0, 0.0, 1.0))
    mat = crumpton_material(1.0)
    field = broken_from_function(
        mesh, lambda x, y, s: 3.0 * x + 2.0 if s == 1 else x)
    J = evaluate_broken_functional(mesh, mat, lambda x, y, s: 0.0 * x, field)
    assert J == pytest.approx(0.5, abs=1e-13)
