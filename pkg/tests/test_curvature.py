import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geometry import jet
from geometry.curvature import (
    MetricChart,
    affine_pullback,
    christoffel,
    curvature_tensors,
    first_bianchi,
    flat_chart,
    polar_sphere_chart,
    product_chart,
    ricci_residual_sweep,
    stereographic_sphere_chart,
)
from geometry.errors import ChartDomainError, InvalidInputError, LinearSolveError


def test_flat_space_has_no_connection_or_curvature():
    report = curvature_tensors(flat_chart(3), [0.1, 0.2, 0.3])
    assert np.max(np.abs(report.christoffel)) == 0.0
    assert np.max(np.abs(report.riemann)) == 0.0


@pytest.mark.parametrize("n,radius", [(2, 1.0), (3, 1.0), (4, 2.0)])
def test_round_sphere_is_einstein(n, radius):
    report = curvature_tensors(stereographic_sphere_chart(n, radius), np.linspace(-0.4, 0.3, n))
    assert report.ricci_operator_norm((n - 1) / radius**2) < 1e-10
    assert report.scalar == pytest.approx(n * (n - 1) / radius**2, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3))
def test_first_bianchi_identity(point):
    report = curvature_tensors(stereographic_sphere_chart(3), point)
    assert np.max(np.abs(first_bianchi(report.riemann))) < 1e-10


def test_polar_chart_scalar_curvature():
    report = curvature_tensors(polar_sphere_chart(), [1.1, 0.4])
    assert report.scalar == pytest.approx(2.0, rel=1e-10)


def test_polar_chart_rejects_the_pole():
    with pytest.raises(ChartDomainError):
        curvature_tensors(polar_sphere_chart(), [0.0, 0.4])


def test_product_of_unit_spheres_is_einstein():
    chart = product_chart(stereographic_sphere_chart(2), stereographic_sphere_chart(2))
    report = curvature_tensors(chart, [0.2, -0.1, 0.5, 0.3])
    assert report.ricci_operator_norm(1.0) < 1e-10
    assert report.scalar == pytest.approx(4.0, rel=1e-10)


def test_affine_pullback_preserves_scalar_curvature():
    chart = stereographic_sphere_chart(3)
    matrix = np.array([[1.0, 0.2, 0.0], [0.0, 0.9, 0.1], [0.3, 0.0, 1.1]])
    shift = np.array([0.1, -0.2, 0.05])
    pulled = affine_pullback(chart, matrix, shift)
    y = np.array([0.2, 0.1, -0.3])
    assert curvature_tensors(pulled, y).scalar == pytest.approx(
        curvature_tensors(chart, matrix @ y + shift).scalar, rel=1e-9
    )


def test_christoffel_symbols_are_symmetric():
    gamma = christoffel(stereographic_sphere_chart(3), [0.3, -0.1, 0.7])
    np.testing.assert_allclose(gamma, np.swapaxes(gamma, 1, 2), atol=1e-14)


def test_ricci_sweep_on_sphere():
    chart = stereographic_sphere_chart(3)
    result = ricci_residual_sweep(chart, lambda rng: rng.uniform(-1.0, 1.0, size=3), 10, seed=1, einstein_constant=2.0)
    assert result.failures == 0
    assert result.max_residual < 1e-9


def test_sweep_count_must_be_positive():
    with pytest.raises(InvalidInputError):
        ricci_residual_sweep(flat_chart(2), lambda rng: rng.uniform(size=2), 0)


def test_asymmetric_metric_is_rejected():
    chart = MetricChart(2, lambda x: jet.constant(np.array([[1.0, 0.5], [0.0, 1.0]]), 2), name="skew")
    with pytest.raises(InvalidInputError):
        chart.evaluate([0.0, 0.0])


def test_indefinite_metric_is_rejected():
    chart = MetricChart(2, lambda x: jet.constant(np.diag([1.0, -1.0]), 2), name="lorentz")
    with pytest.raises(LinearSolveError):
        chart.evaluate([0.0, 0.0])
