"""Quadrature rules and nodal Lagrange calculus."""

import numpy as np
import pytest

from cgpwave.quadrature import (NodalBasis, Rule1D, eval_lagrange,
                                gauss_lobatto_rule, gauss_rule, nodal_basis)


def monomial_integral(p):
    # int_{-1}^{1} x^p dx
    return 2.0 / (p + 1) if p % 2 == 0 else 0.0


@pytest.mark.parametrize("m", range(1, 9))
def test_gauss_exactness(m):
    rule = gauss_rule(m)
    for p in range(2 * m):
        val = rule.weights @ rule.nodes ** p
        assert abs(val - monomial_integral(p)) < 1e-13


def test_gauss_sharpness():
    # two points integrate cubics but not quartics
    rule = gauss_rule(2)
    assert abs(rule.weights @ rule.nodes ** 4 - monomial_integral(4)) > 1e-3


@pytest.mark.parametrize("m", range(2, 9))
def test_gauss_lobatto_exactness(m):
    rule = gauss_lobatto_rule(m)
    assert rule.nodes[0] == -1.0 and rule.nodes[-1] == 1.0
    for p in range(2 * m - 2):
        val = rule.weights @ rule.nodes ** p
        assert abs(val - monomial_integral(p)) < 1e-13


@pytest.mark.parametrize("make", [gauss_rule, gauss_lobatto_rule])
@pytest.mark.parametrize("m", range(2, 9))
def test_rule_structure(make, m):
    rule = make(m)
    assert abs(rule.weights.sum() - 2.0) < 1e-14
    assert np.all(rule.weights > 0)
    assert np.all(np.diff(rule.nodes) > 0)
    # node symmetry about the origin
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)


def test_gauss_3_closed_form():
    rule = gauss_rule(3)
    a = np.sqrt(0.6)
    assert np.allclose(rule.nodes, [-a, 0.0, a], atol=1e-15)
    assert np.allclose(rule.weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-15)


def test_gauss_lobatto_4_closed_form():
    rule = gauss_lobatto_rule(4)
    a = 1 / np.sqrt(5.0)
    assert np.allclose(rule.nodes, [-1.0, -a, a, 1.0], atol=1e-15)
    assert np.allclose(rule.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], atol=1e-15)


@pytest.mark.parametrize("m", [5, 6, 7, 10])
def test_gauss_newton_path_against_numpy(m):
    # independent oracle for the iterative branch
    rule = gauss_rule(m)
    ref_x, ref_w = np.polynomial.legendre.leggauss(m)
    assert np.allclose(rule.nodes, ref_x, atol=1e-14)
    assert np.allclose(rule.weights, ref_w, atol=1e-14)


def test_errors_on_bad_point_counts():
    with pytest.raises(ValueError):
        gauss_rule(0)
    with pytest.raises(ValueError):
        gauss_lobatto_rule(1)


@pytest.mark.parametrize("m", range(2, 7))
def test_diff_matrix_differentiates_polynomials(m):
    basis = nodal_basis(gauss_lobatto_rule(m).nodes)
    x = basis.nodes
    for p in range(m):
        expect = p * x ** (p - 1) if p > 0 else np.zeros_like(x)
        assert np.allclose(basis.diff @ x ** p, expect, atol=1e-12)


def test_diff_matrix_gl3_entry():
    basis = nodal_basis(gauss_lobatto_rule(3).nodes)
    assert abs(basis.diff[0, 0] + 1.5) < 1e-14
    assert np.allclose(basis.diff.sum(axis=1), 0.0, atol=1e-13)


def test_nodal_basis_rejects_duplicates():
    with pytest.raises(ValueError):
        nodal_basis([0.0, 0.5, 0.5])
    with pytest.raises(ValueError):
        nodal_basis([])


def test_cardinal_values_at_nodes():
    basis = nodal_basis(gauss_lobatto_rule(4).nodes)
    V = basis.values_at(basis.nodes)
    assert np.array_equal(V, np.eye(4))  # product form is exact there


def test_derivs_at_matches_diff_matrix():
    basis = nodal_basis(gauss_lobatto_rule(4).nodes)
    assert np.allclose(basis.derivs_at(basis.nodes), basis.diff, atol=1e-13)


def test_eval_lagrange_reproduces_nodal_data():
    rng = np.random.default_rng(7)
    basis = nodal_basis(gauss_rule(4).nodes)
    coeffs = rng.standard_normal(4)
    vals = eval_lagrange(basis, coeffs, basis.nodes)
    assert np.allclose(vals, coeffs, atol=1e-14)


def test_eval_lagrange_quadratic_example():
    # coefficients of x^2 at the Gauss-Lobatto(3) nodes evaluated midway
    basis = nodal_basis(gauss_lobatto_rule(3).nodes)
    assert abs(eval_lagrange(basis, [1.0, 0.0, 1.0], 0.5) - 0.25) < 1e-15


def test_eval_lagrange_vector_coefficients():
    basis = nodal_basis(gauss_lobatto_rule(3).nodes)
    coeffs = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])  # x^2 and 2x^2
    vals = eval_lagrange(basis, coeffs, 0.5)
    assert np.allclose(vals, [0.25, 0.5], atol=1e-15)


def test_eval_lagrange_length_mismatch():
    basis = nodal_basis(gauss_lobatto_rule(3).nodes)
    with pytest.raises(ValueError):
        eval_lagrange(basis, [1.0, 2.0], 0.0)


def test_rule_integrate_helper():
    rule = gauss_rule(7)
    assert abs(rule.integrate(np.cos) - 2 * np.sin(1.0)) < 1e-13
