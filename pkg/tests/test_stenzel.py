import math

import numpy as np
import pytest

from geometry.errors import InvalidInputError, PivotError
from geometry.exterior import exterior_derivative
from geometry.isoparametric import build_family, family_g3
from geometry.stenzel import (
    MIN_SAMPLES,
    POTENTIALS,
    QuadricPoint,
    build_submanifold,
    compile_expression,
    conormal_immersion,
    equator_chart,
    fkm_focal_chart,
    g2_focal_chart,
    g2_level_chart,
    gauss_map_sweep,
    holomorphic_volume,
    kahler_form_field,
    phase_distance,
    phase_of_dimension,
    phase_spread,
    potential_from_expression,
    sample_conormal,
    slag_sweep,
    slag_verify,
    stenzel_kahler_form,
    submanifold_from_manifest,
    to_quadric,
    veronese_chart,
)

CLIFFORD_TORUS = """
name = clifford-torus
dim = 2
ambient = 4
box = -3.0, 3.0
x1 = cos(s1)/sqrt(2)
x2 = sin(s1)/sqrt(2)
x3 = cos(s2)/sqrt(2)
x4 = sin(s2)/sqrt(2)
"""


def quadric_sample(n=3, seed=0, size=0.7):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n + 1)
    x /= np.linalg.norm(x)
    xi = rng.standard_normal(n + 1)
    xi -= (xi @ x) * x
    xi *= size / np.linalg.norm(xi)
    return x, xi, to_quadric(x, xi)


def tangent_vector(z, rng):
    # project onto the complex tangent space {v : Σ z_j v_j = 0}
    v = rng.standard_normal(z.z.size) + 1j * rng.standard_normal(z.z.size)
    return v - (z.z @ v) / (z.z @ z.z.conj()) * z.z.conj()


def test_quadric_map_hits_the_quadric():
    _, xi, z = quadric_sample()
    assert z.residual < 1e-12
    assert z.tau == pytest.approx(math.cosh(2.0 * np.linalg.norm(xi)), rel=1e-12)


def test_zero_covector_maps_to_the_base_point():
    x = np.array([0.0, 0.6, 0.8])
    np.testing.assert_array_equal(to_quadric(x, np.zeros(3)).z, x)


def test_quadric_map_needs_an_orthogonal_covector():
    with pytest.raises(InvalidInputError):
        to_quadric(np.array([1.0, 0.0, 0.0]), np.array([0.5, 1.0, 0.0]))


def test_points_off_the_quadric_are_rejected():
    with pytest.raises(InvalidInputError):
        QuadricPoint(np.array([1.0, 1.0, 0.0]))


@pytest.mark.parametrize("name", sorted(POTENTIALS))
def test_kahler_matrix_is_hermitian_positive(name):
    _, _, z = quadric_sample(seed=2)
    kahler = stenzel_kahler_form(POTENTIALS[name](), z)
    a = kahler.hermitian
    np.testing.assert_allclose(a, a.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(a)) > 0.0


def test_linear_potential_reduces_to_the_flat_restriction():
    _, _, z = quadric_sample(seed=4)
    kahler = stenzel_kahler_form(POTENTIALS["linear"](), z)
    zs = z.z[list(kahler.slots)]
    z0 = z.z[kahler.pivot]
    expected = np.eye(zs.size) + np.outer(zs, zs.conj()) / abs(z0) ** 2
    np.testing.assert_allclose(kahler.hermitian, expected, atol=1e-12)


@pytest.mark.parametrize("name", sorted(POTENTIALS))
def test_kahler_form_is_closed(name):
    _, _, z = quadric_sample(n=3, seed=5)
    field_, point = kahler_form_field(POTENTIALS[name](), z)
    assert exterior_derivative(field_, point).norm_inf() < 1e-9


def test_kahler_form_is_positive_on_complex_lines():
    _, _, z = quadric_sample(seed=6)
    kahler = stenzel_kahler_form(POTENTIALS["exponential"](), z)
    v = tangent_vector(z, np.random.default_rng(1))
    assert kahler.pair(v, 1j * v) > 0.0


def test_pairing_does_not_depend_on_the_pivot():
    _, _, z = quadric_sample(seed=8)
    rng = np.random.default_rng(3)
    v, w = tangent_vector(z, rng), tangent_vector(z, rng)
    u = POTENTIALS["quadratic"]()
    first = stenzel_kahler_form(u, z, pivot=0).pair(v, w)
    second = stenzel_kahler_form(u, z, pivot=2).pair(v, w)
    assert first == pytest.approx(second, rel=1e-10, abs=1e-12)


def test_vanishing_pivot_is_refused():
    z = QuadricPoint(np.array([0.0, 1.0, 0.0]))
    with pytest.raises(PivotError):
        stenzel_kahler_form(POTENTIALS["linear"](), z, pivot=0)


def test_holomorphic_volume_scales_with_the_frame():
    _, _, z = quadric_sample(seed=9)
    frame = np.random.default_rng(0).standard_normal((4, 3)) + 0j
    scale = 0.5 + 1.5j
    assert holomorphic_volume(z, scale * frame) == pytest.approx(scale**3 * holomorphic_volume(z, frame))


def test_phase_of_dimension():
    assert phase_distance(phase_of_dimension(3, 4), math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert phase_distance(phase_of_dimension(3, 7), 0.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidInputError):
        phase_of_dimension(5, 4)


def test_phase_spread_wraps_modulo_pi():
    _, spread = phase_spread([math.pi / 2 - 1e-9, -math.pi / 2 + 1e-9])
    assert spread < 1e-8


@pytest.mark.parametrize(
    "chart",
    [equator_chart(4), g2_focal_chart(3, 7, 1), g2_focal_chart(2, 7, -1), veronese_chart(-1), fkm_focal_chart(1, 3)],
    ids=lambda c: c.name,
)
def test_austere_conormal_bundles_are_special_lagrangian(chart):
    samples = sample_conormal(chart, MIN_SAMPLES, np.random.default_rng(21))
    certificates = slag_sweep(samples)
    predicted = phase_of_dimension(chart.dim, chart.ambient_dim - 1)
    for certificate in certificates:
        assert certificate.status == "PASS"
        assert certificate.lagrangian_residual < 1e-8
        assert certificate.phase_spread < 1e-6
        assert phase_distance(certificate.phase, predicted) < 1e-6
        assert certificate.certified


def test_non_austere_level_is_lagrangian_with_varying_phase():
    samples = sample_conormal(g2_level_chart(1, 7, 0.5), MIN_SAMPLES, np.random.default_rng(22))
    certificate = slag_verify(samples, POTENTIALS["quadratic"]())
    assert certificate.lagrangian_residual < 1e-8
    assert certificate.phase_spread > 1e-3
    assert certificate.status == "FAIL"


def test_too_few_samples_are_refused():
    samples = sample_conormal(equator_chart(4), 5, np.random.default_rng(0))
    with pytest.raises(InvalidInputError):
        slag_verify(samples, POTENTIALS["linear"]())


def test_zero_section_frame():
    chart = equator_chart(4)
    sample = conormal_immersion(chart, np.array([0.1, -0.2, 0.3]), np.zeros(1))
    np.testing.assert_allclose(sample.z.z.imag, 0.0)
    assert sample.frame.shape == (5, 4)
    assert sample.tangency < 1e-10


def test_focal_chart_points_sit_on_the_focal_level():
    s = np.array([0.1, 0.2, -0.3, 0.15])
    x = veronese_chart(-1).point(s)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)
    assert build_family("g3-adjoint").value(x) == pytest.approx(-1.0, abs=1e-10)
    y = fkm_focal_chart(1, 3).point(np.array([0.2, -0.1, 0.3]))
    assert build_family("fkm", m=1, ell=3).value(y) == pytest.approx(-1.0, abs=1e-10)


def test_user_chart_from_manifest():
    chart = submanifold_from_manifest(CLIFFORD_TORUS)
    assert (chart.dim, chart.ambient_dim, chart.certified) == (2, 4, False)
    assert np.linalg.norm(chart.point([0.4, 1.1])) == pytest.approx(1.0, abs=1e-14)
    samples = sample_conormal(chart, MIN_SAMPLES, np.random.default_rng(5))
    certificate = slag_verify(samples, POTENTIALS["linear"]())
    assert certificate.status == "PASS"
    assert not certificate.certified


def test_catalog_chart_from_manifest():
    chart = submanifold_from_manifest("catalog = g2-focal\nk = 2\nn = 5\nbranch = 1\n")
    assert chart.certified
    assert chart.dim == 2


def test_unknown_catalog_entry():
    with pytest.raises(InvalidInputError):
        build_submanifold("torus")


def test_expressions_reject_unknown_names():
    with pytest.raises(InvalidInputError):
        compile_expression("foo(s1)", ["s1"])
    with pytest.raises(InvalidInputError):
        compile_expression("s1 + y", ["s1"])
    with pytest.raises(InvalidInputError):
        compile_expression("s1 +* 2", ["s1"])


def test_user_potential_derivatives():
    u = potential_from_expression("tau + tau**2/4")
    first, second = u.derivatives(2.0)
    assert float(first) == pytest.approx(2.0)
    assert float(second) == pytest.approx(0.5)
    assert u.provenance == "user-supplied"


def test_user_potential_must_increase():
    _, _, z = quadric_sample(seed=1)
    with pytest.raises(InvalidInputError):
        stenzel_kahler_form(potential_from_expression("-tau"), z)


def test_gauss_map_of_the_cartan_hypersurface_is_lagrangian():
    report = gauss_map_sweep(family_g3(), 0.2, 8, seed=3)
    assert report.status == "PASS"
    assert report.rejected == 0
    assert report.quadric_residual < 1e-10
