"""Mesh, Q_r spaces, assembly, projections, and spatial norms."""

import numpy as np
import pytest
import scipy.sparse as sp

from cgpwave.fem import (SpatialFunction, assemble_load, build_space,
                         interpolate, l2_project, ritz_project,
                         spatial_h1_seminorm, spatial_l2_norm,
                         unit_square_mesh)
from cgpwave.quadrature import gauss_rule, nodal_basis

# biquadratic member of every Q_r space with r >= 2, zero on the boundary
BUBBLE = SpatialFunction(
    value=lambda x1, x2: x1 * (x1 - 1) * x2 * (x2 - 1),
    gradient=lambda x1, x2: ((2 * x1 - 1) * x2 * (x2 - 1),
                             x1 * (x1 - 1) * (2 * x2 - 1)))

SINE = SpatialFunction(
    value=lambda x1, x2: np.sin(np.pi * x1) * np.sin(np.pi * x2),
    gradient=lambda x1, x2: (np.pi * np.cos(np.pi * x1) * np.sin(np.pi * x2),
                             np.pi * np.sin(np.pi * x1) * np.cos(np.pi * x2)))


def test_mesh_levels():
    m0 = unit_square_mesh(0)
    assert m0.cells_per_side == 2 and m0.cell_size == 0.5
    assert abs(m0.diameter - np.sqrt(2) / 2) < 1e-15
    assert unit_square_mesh(3).cells_per_side == 16
    with pytest.raises(ValueError):
        unit_square_mesh(-1)


@pytest.mark.parametrize("level,r,n_int", [(0, 1, 1), (0, 2, 9), (1, 2, 49), (3, 3, 2209)])
def test_space_dimensions(level, r, n_int):
    space = build_space(unit_square_mesh(level), r)
    assert space.n_interior == n_int
    assert space.lattice_width == r * unit_square_mesh(level).cells_per_side + 1
    assert space.mass.shape == (n_int, n_int)


def test_bad_degree():
    with pytest.raises(ValueError):
        build_space(unit_square_mesh(0), 0)


@pytest.mark.parametrize("level,r", [(0, 1), (0, 2), (1, 3)])
def test_full_mass_partition_of_unity(level, r):
    space = build_space(unit_square_mesh(level), r)
    assert abs(space.mass_full.sum() - 1.0) < 1e-13


@pytest.mark.parametrize("level,r", [(0, 1), (0, 2), (1, 3)])
def test_full_stiffness_row_sums(level, r):
    space = build_space(unit_square_mesh(level), r)
    rowsums = np.asarray(space.stiffness_full.sum(axis=1)).ravel()
    assert np.max(np.abs(rowsums)) < 1e-12


def test_q1_level0_closed_forms():
    # single interior node: mass 4 h^2 / 9, stiffness 8/3
    space = build_space(unit_square_mesh(0), 1)
    h = 0.5
    assert abs(space.mass.toarray()[0, 0] - 4 * h ** 2 / 9) < 1e-15
    assert abs(space.stiffness.toarray()[0, 0] - 8 / 3) < 1e-14


@pytest.mark.parametrize("r", [1, 2, 3])
def test_matrices_spd(r):
    space = build_space(unit_square_mesh(0), r)
    for mat in (space.mass, space.stiffness):
        dense = mat.toarray()
        assert np.allclose(dense, dense.T, atol=1e-14)
        assert np.linalg.eigvalsh(dense).min() > 0


@pytest.mark.parametrize("r", [1, 2])
def test_assembly_against_brute_force(r):
    # independent route: per-entry 2D quadrature of basis products
    space = build_space(unit_square_mesh(0), r)
    n = 2
    h = 0.5
    W = r * n + 1
    basis = nodal_basis(np.linspace(-1.0, 1.0, r + 1))
    rule = gauss_rule(8)
    V = basis.values_at(rule.nodes)
    Vd = basis.derivs_at(rule.nodes)
    mass = np.zeros((W * W, W * W))
    stiff = np.zeros((W * W, W * W))
    for cy in range(n):
        for cx in range(n):
            for b in range(r + 1):
                for a in range(r + 1):
                    gi = (cy * r + b) * W + cx * r + a
                    for d in range(r + 1):
                        for c in range(r + 1):
                            gj = (cy * r + d) * W + cx * r + c
                            mij = kij = 0.0
                            for qy in range(rule.nodes.size):
                                for qx in range(rule.nodes.size):
                                    wq = rule.weights[qy] * rule.weights[qx]
                                    mij += wq * V[qy, b] * V[qx, a] * V[qy, d] * V[qx, c]
                                    kij += wq * (V[qy, b] * Vd[qx, a] * V[qy, d] * Vd[qx, c] * (2 / h) ** 2
                                                 + Vd[qy, b] * V[qx, a] * Vd[qy, d] * V[qx, c] * (2 / h) ** 2)
                            mass[gi, gj] += mij * (h / 2) ** 2
                            stiff[gi, gj] += kij * (h / 2) ** 2
    assert np.allclose(space.mass_full.toarray(), mass, atol=1e-13)
    assert np.allclose(space.stiffness_full.toarray(), stiff, atol=1e-12)


@pytest.mark.parametrize("solver", ["direct", "cg"])
def test_projection_idempotence(solver):
    # BUBBLE lies in Q_2, so both projections must reproduce its interpolant
    space = build_space(unit_square_mesh(1), 2)
    nodal = interpolate(space, BUBBLE)
    assert np.max(np.abs(l2_project(space, BUBBLE, solver=solver) - nodal)) < 1e-10
    assert np.max(np.abs(ritz_project(space, BUBBLE, solver=solver) - nodal)) < 1e-10


def test_load_of_space_member_is_mass_times_coeffs():
    space = build_space(unit_square_mesh(1), 2)
    c = interpolate(space, BUBBLE)
    b = assemble_load(space, BUBBLE)
    assert np.max(np.abs(b - space.mass @ c)) < 1e-14


def test_ritz_needs_gradient():
    space = build_space(unit_square_mesh(0), 2)
    with pytest.raises(ValueError):
        ritz_project(space, SpatialFunction(value=lambda x1, x2: x1 * x2))
    with pytest.raises(ValueError):
        ritz_project(space, lambda x1, x2: x1 * x2)


def test_unknown_solver():
    space = build_space(unit_square_mesh(0), 1)
    with pytest.raises(ValueError):
        l2_project(space, BUBBLE, solver="qr")


@pytest.mark.parametrize("r", [1, 2])
def test_l2_projection_convergence(r):
    errs = []
    for level in range(5 - r):
        space = build_space(unit_square_mesh(level), r)
        c = l2_project(space, SINE, solver="direct")
        errs.append(spatial_l2_norm(space, c, SINE))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert abs(rates[-1] - (r + 1)) < 0.15  # asymptotic order r+1


@pytest.mark.parametrize("r", [1, 2])
def test_ritz_projection_convergence(r):
    errs = []
    for level in range(5 - r):
        space = build_space(unit_square_mesh(level), r)
        c = ritz_project(space, SINE, solver="direct")
        errs.append(spatial_h1_seminorm(space, c, SINE))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert abs(rates[-1] - r) < 0.15  # asymptotic order r


def test_norm_consistency_with_mass_matrix():
    rng = np.random.default_rng(3)
    space = build_space(unit_square_mesh(1), 2)
    c = rng.standard_normal(space.n_interior)
    norm_quad = spatial_l2_norm(space, c)
    norm_mass = np.sqrt(c @ (space.mass @ c))
    assert abs(norm_quad - norm_mass) < 1e-12 * max(1.0, norm_mass)


def test_h1_seminorm_consistency_with_stiffness():
    rng = np.random.default_rng(4)
    space = build_space(unit_square_mesh(1), 2)
    c = rng.standard_normal(space.n_interior)
    semi_quad = spatial_h1_seminorm(space, c)
    semi_stiff = np.sqrt(c @ (space.stiffness @ c))
    assert abs(semi_quad - semi_stiff) < 1e-12 * max(1.0, semi_stiff)


def test_interior_coords_lexicographic():
    space = build_space(unit_square_mesh(0), 2)
    # 3x3 interior lattice of the 5x5 grid, x fastest
    expect = [(0.25 * (i + 1), 0.25 * (j + 1)) for j in range(3) for i in range(3)]
    assert np.allclose(space.interior_coords, expect, atol=1e-15)


def test_quad_grid_cache():
    space = build_space(unit_square_mesh(0), 2)
    g1 = space.quad_grid(4)
    g2 = space.quad_grid(4)
    assert g1 is g2
    assert isinstance(g1.B, sp.csr_matrix)
    assert g1.w.sum() == pytest.approx(1.0, abs=1e-14)
