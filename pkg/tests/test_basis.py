import numpy as np
import pytest

from lwblend.basis import (
    build_basis,
    gauss_legendre_01,
    gauss_lobatto_01,
    lagrange_eval_matrix,
    legendre_to_nodal,
    nodal_to_legendre,
)


def test_gauss_legendre_closed_forms():
    x, w = gauss_legendre_01(1)
    np.testing.assert_allclose(x, [0.5], atol=1e-15)
    np.testing.assert_allclose(w, [1.0], atol=1e-15)

    x, w = gauss_legendre_01(2)
    np.testing.assert_allclose(x, [(3 - np.sqrt(3)) / 6, (3 + np.sqrt(3)) / 6], atol=1e-15)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)

    x, w = gauss_legendre_01(3)
    r = np.sqrt(3.0 / 5.0)
    np.testing.assert_allclose(x, [(1 - r) / 2, 0.5, (1 + r) / 2], atol=1e-15)
    np.testing.assert_allclose(w, [5 / 18, 4 / 9, 5 / 18], atol=1e-15)


def test_gauss_legendre_rejects_zero_points():
    with pytest.raises(ValueError):
        gauss_legendre_01(0)


@pytest.mark.parametrize("n", range(1, 9))
def test_gauss_legendre_matches_numpy(n):
    x, w = gauss_legendre_01(n)
    xr, wr = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(x, (xr + 1) / 2, atol=1e-14)
    np.testing.assert_allclose(w, wr / 2, atol=1e-14)


@pytest.mark.parametrize("family,n,exact_degree", [
    ("GL", 2, 3), ("GL", 3, 5), ("GL", 4, 7), ("GL", 5, 9), ("GL", 6, 11),
    ("GLL", 2, 1), ("GLL", 3, 3), ("GLL", 4, 5), ("GLL", 5, 7),
])
def test_quadrature_exactness_on_monomials(family, n, exact_degree):
    x, w = gauss_legendre_01(n) if family == "GL" else gauss_lobatto_01(n)
    assert np.all(w > 0)
    assert abs(np.sum(w) - 1.0) < 1e-14
    for p in range(exact_degree + 1):
        q = np.sum(w * x**p)
        assert abs(q - 1.0 / (p + 1)) < 1e-12, (family, n, p)


@pytest.mark.parametrize("family", ["GL", "GLL"])
@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5, 6])
def test_node_symmetry(family, degree):
    b = build_basis(degree, family)
    np.testing.assert_allclose(b.nodes + b.nodes[::-1], 1.0, atol=1e-14)
    np.testing.assert_allclose(b.weights, b.weights[::-1], atol=1e-14)
    assert np.all(np.diff(b.nodes) > 0)


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_differentiation_exact_on_monomials(degree):
    b = build_basis(degree)
    for p in range(degree + 1):
        deriv = b.diff_matrix @ b.nodes**p
        expect = np.zeros_like(b.nodes) if p == 0 else p * b.nodes ** (p - 1)
        np.testing.assert_allclose(deriv, expect, atol=1e-12)


# repeated differentiation amplifies roundoff like ||D||^(N+1); the 1e-10
# bound is meaningful for the solver's supported degrees N <= 4
@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_differentiation_nilpotent(degree):
    b = build_basis(degree)
    rng = np.random.default_rng(7)
    u = rng.normal(size=degree + 1)
    for _ in range(degree + 1):
        u = b.diff_matrix @ u
    assert np.max(np.abs(u)) < 1e-10


def test_diff_matrix_linear_degree_one():
    b = build_basis(1)
    np.testing.assert_allclose(b.diff_matrix @ b.nodes, [1.0, 1.0], atol=1e-13)


def test_boundary_extrapolation_quadratic():
    b = build_basis(2)
    val0 = b.interp_left @ b.nodes**2
    assert abs(val0) < 1e-13
    val1 = b.interp_right @ b.nodes**2
    assert abs(val1 - 1.0) < 1e-13


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_correction_gradient_quadrature_and_symmetry(degree):
    b = build_basis(degree)
    # integral of g_L' picked up exactly by the node quadrature
    assert abs(np.sum(b.correction_grad_left * b.weights) + 1.0) < 1e-12
    assert abs(np.sum(b.correction_grad_right * b.weights) - 1.0) < 1e-12
    np.testing.assert_allclose(
        b.correction_grad_right, -b.correction_grad_left[::-1], atol=1e-12
    )


def test_correction_function_endpoint_values():
    # reconstruct g_L from its nodal derivative by integrating the
    # degree-N interpolant: g_L(1) - g_L(0) = -1 and the interpolated
    # derivative must match the analytic Radau derivative at off-node points
    for degree in (1, 2, 3, 4):
        b = build_basis(degree)
        pts = np.linspace(0, 1, 11)
        S = lagrange_eval_matrix(b.nodes, pts)
        interp = S @ b.correction_grad_left
        from lwblend.basis import _radau_gradient

        np.testing.assert_allclose(interp, _radau_gradient(degree, pts), atol=1e-10)


def test_build_basis_rejects_bad_input():
    with pytest.raises(ValueError):
        build_basis(0)
    with pytest.raises(ValueError):
        build_basis(3, "chebyshev")


class TestLegendreTransform:
    def test_constant_field(self):
        b = build_basis(3)
        qh = nodal_to_legendre(np.full(4, 2.5), b)
        np.testing.assert_allclose(qh, [2.5, 0, 0, 0], atol=1e-13)

    def test_highest_mode_isolated(self):
        for degree in (1, 2, 3, 4):
            b = build_basis(degree)
            coeffs = np.zeros(degree + 1)
            coeffs[-1] = 1.0
            values = legendre_to_nodal(coeffs, b)
            qh = nodal_to_legendre(values, b)
            np.testing.assert_allclose(qh, coeffs, atol=1e-12)

    @pytest.mark.parametrize("degree", [1, 2, 3, 4, 5, 6])
    def test_round_trip_random_modal(self, degree):
        b = build_basis(degree)
        rng = np.random.default_rng(degree)
        coeffs = rng.normal(size=(40, degree + 1))
        back = nodal_to_legendre(legendre_to_nodal(coeffs, b), b)
        assert np.max(np.abs(back - coeffs)) < 1e-11
