import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geometry import jet
from geometry.errors import InvalidInputError, JetDomainError

coords = st.lists(st.floats(-0.8, 0.8), min_size=3, max_size=3)


def test_product_rule_is_exact():
    x = jet.seed_vector([2.0, 3.0])
    f = x[0] * x[1]
    assert float(f.value) == 6.0
    np.testing.assert_array_equal(f.grad, [3.0, 2.0])
    np.testing.assert_array_equal(f.hess, [[0.0, 1.0], [1.0, 0.0]])


def test_sine_matches_closed_form():
    x = jet.seed([0.7])[0]
    f = jet.sin(x * x)
    assert float(f.value) == pytest.approx(math.sin(0.49))
    assert f.grad[0] == pytest.approx(2 * 0.7 * math.cos(0.49))
    assert f.hess[0, 0] == pytest.approx(2 * math.cos(0.49) - 4 * 0.49 * math.sin(0.49))


def test_constants_and_arrays_mix_with_jets():
    x = jet.seed_vector([1.0, -2.0])
    f = 3.0 - x
    np.testing.assert_array_equal(f.value, [2.0, 5.0])
    g = np.array([1.0, 1.0]) - x
    np.testing.assert_array_equal(g.grad, -np.eye(2))


@settings(max_examples=30, deadline=None)
@given(coords)
def test_composite_agrees_with_finite_differences(point):
    def f(x):
        return jet.exp(x[0]) * jet.sin(x[1]) + jet.arctan(x[2] * x[0]) + jet.sqrt(2.0 + x[1] * x[1]) * jet.tanh(x[2])

    assert jet.fd_check(f, point).relative_error < 1e-6


def test_determinant_derivatives():
    x = jet.seed_vector([1.5, 0.4])
    m = jet.stack([jet.stack([x[0], x[1]]), jet.stack([x[1], x[0]])])
    d = jet.det(m)
    assert float(d.value) == pytest.approx(1.5**2 - 0.4**2)
    np.testing.assert_allclose(d.grad, [3.0, -0.8])
    np.testing.assert_allclose(d.hess, [[2.0, 0.0], [0.0, -2.0]], atol=1e-12)


def test_inverse_times_matrix_is_constant_identity():
    x = jet.seed_vector([1.2, 0.3, -0.5])
    m = jet.stack([jet.stack([2.0 + x[0], x[1]]), jet.stack([x[2] * x[1], 1.0 + x[0] * x[0]])])
    product = jet.einsum("ij,jk->ik", jet.inv(m), m)
    np.testing.assert_allclose(product.value, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(product.grad, 0.0, atol=1e-12)
    np.testing.assert_allclose(product.hess, 0.0, atol=1e-11)


def test_sqrt_rejects_non_positive_jets():
    x = jet.seed([0.0])[0]
    with pytest.raises(JetDomainError):
        jet.sqrt(x)


def test_log_rejects_negative_jets():
    x = jet.seed([-1.0])[0]
    with pytest.raises(JetDomainError):
        jet.log(x)


def test_elementary_functions_fall_back_to_numpy():
    assert jet.cosh(0.0) == 1.0
    assert jet.sqrt(4.0) == 2.0


def test_complex_square_root_squares_back():
    x = jet.seed_vector([0.3, 0.8])
    z = jet.ComplexJet2(1.0 + x[0] * x[1], x[1] - x[0])
    root = jet.csqrt(z)
    back = root * root
    np.testing.assert_allclose(back.value, z.value, atol=1e-14)
    np.testing.assert_allclose(back.grad, z.grad, atol=1e-13)
    np.testing.assert_allclose(back.hess, z.hess, atol=1e-12)


def test_complex_division_inverts_multiplication():
    x = jet.seed_vector([0.5, -0.2])
    z = jet.ComplexJet2(x[0] * x[0], x[1])
    w = jet.ComplexJet2(2.0 + x[1], x[0] * x[1])
    back = (z / w) * w
    np.testing.assert_allclose(back.grad, z.grad, atol=1e-13)
    np.testing.assert_allclose(back.hess, z.hess, atol=1e-12)


def test_csqrt_refuses_the_origin():
    z = jet.complex_constant(0.0, 2)
    with pytest.raises(JetDomainError):
        jet.csqrt(z)


def test_fd_check_needs_a_positive_step():
    with pytest.raises(InvalidInputError):
        jet.fd_check(lambda x: x[0], [1.0], h=0.0)


def test_inconsistent_shapes_are_rejected():
    with pytest.raises(InvalidInputError):
        jet.Jet2(np.zeros(2), np.zeros((3, 2)), np.zeros((3, 2, 2)))
