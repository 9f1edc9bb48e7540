import math

import numpy as np
import pytest

from geometry.bryant_salamon import (
    ASD_EXPONENTS,
    SEARCH_STARTS,
    SPIN_EXPONENTS,
    WarpedMetricSpec,
    asd_bundle_spec,
    asd_frame_forms,
    bundle_metric,
    chart_panel,
    left_translation_defect,
    normalization_search,
    panel_residual,
    quaternion_multiply,
    r_to_t,
    random_chart_points,
    spin_bundle_spec,
    spin_homeomorphism,
    spin_homeomorphism_inverse,
    stratification_residual,
    t_to_r,
)
from geometry.errors import ChartDomainError, InvalidInputError
from geometry.exterior import hodge_star
from geometry.isoparametric import family_g2


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_level_map_endpoints():
    assert r_to_t(0.0) == -1.0
    assert r_to_t(1.0) == 0.0
    assert r_to_t(math.inf) == 1.0
    assert t_to_r(1.0) == math.inf


def test_level_map_roundtrip():
    for t in np.linspace(-0.95, 0.95, 41):
        assert abs(r_to_t(t_to_r(t)) - t) < 1e-15


def test_level_map_domain():
    with pytest.raises(InvalidInputError):
        r_to_t(-0.1)
    with pytest.raises(InvalidInputError):
        t_to_r(1.5)


def test_homeomorphism_lands_on_the_predicted_level():
    rng = np.random.default_rng(0)
    fam = family_g2(3)
    for _ in range(50):
        q = unit(rng.standard_normal(4))
        a = rng.standard_normal(4) * rng.uniform(0.1, 5.0)
        w = spin_homeomorphism(q, a)
        assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-15)
        residual = stratification_residual(w, r_to_t(float(np.linalg.norm(a))), fam)
        assert residual.best < 1e-12
        assert residual.sign == -1


def test_zero_section_maps_to_the_focal_sphere():
    q = unit([1.0, 2.0, -1.0, 0.5])
    w = spin_homeomorphism(q, np.zeros(4))
    np.testing.assert_array_equal(w[4:], 0.0)
    with pytest.raises(ChartDomainError):
        spin_homeomorphism_inverse(w)


def test_inverse_recovers_the_fibre_point():
    q = unit([0.3, -0.4, 0.1, 0.9])
    a = np.array([0.5, 1.5, -2.0, 0.25])
    q_back, direction, r = spin_homeomorphism_inverse(spin_homeomorphism(q, a))
    np.testing.assert_allclose(q_back, q, atol=1e-14)
    np.testing.assert_allclose(direction, unit(a), atol=1e-14)
    assert r == pytest.approx(np.linalg.norm(a), rel=1e-12)


def test_homeomorphism_needs_a_unit_base_point():
    with pytest.raises(InvalidInputError):
        spin_homeomorphism(np.array([1.0, 1.0, 0.0, 0.0]), np.ones(4))


def test_quaternion_product_is_multiplicative_in_norm():
    p, q = unit([1.0, 2.0, 3.0, 4.0]), unit([-1.0, 0.5, 0.0, 2.0])
    assert np.linalg.norm(quaternion_multiply(p, q)) == pytest.approx(1.0, abs=1e-15)


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        WarpedMetricSpec("S3", (1.0, -1.0))
    with pytest.raises(InvalidInputError):
        asd_bundle_spec("S3")
    with pytest.raises(InvalidInputError):
        spin_bundle_spec(lam=0.0)


def test_spec_ids_distinguish_exponents():
    assert spin_bundle_spec().spec_id != spin_bundle_spec(exponents=ASD_EXPONENTS).spec_id
    assert spin_bundle_spec().exponents == SPIN_EXPONENTS


def test_panel_is_reproducible_and_inside_the_box():
    spec = asd_bundle_spec("CP2")
    first, second = chart_panel(spec, 12, seed=3), chart_panel(spec, 12, seed=3)
    np.testing.assert_array_equal(first, second)
    assert np.all(np.abs(first[:, : spec.base_dim]) <= spec.box[0])
    assert np.all(np.abs(first[:, spec.base_dim :]) <= spec.box[1])


@pytest.mark.parametrize("spec", [spin_bundle_spec(), asd_bundle_spec("S4"), asd_bundle_spec("CP2")])
def test_bundle_metric_is_symmetric_positive(spec):
    point = random_chart_points(spec, 1, np.random.default_rng(1))[0]
    g = bundle_metric(spec, point).value
    np.testing.assert_allclose(g, g.T, atol=1e-14)
    assert np.min(np.linalg.eigvalsh(g)) > 0.0


def test_left_translations_are_isometries():
    spec = spin_bundle_spec()
    point = np.array([0.2, -0.3, 0.1, 0.5, -0.4, 0.7, 0.2])
    assert left_translation_defect(spec, point, unit([0.9, 0.1, -0.2, 0.3])) < 1e-10


@pytest.mark.slow
def test_spin_bundle_metric_is_ricci_flat_after_fitting():
    spec = spin_bundle_spec()
    result = normalization_search(spec, panel_seed=0)
    assert result.success
    assert result.residual < 1e-6
    tuned = spec.with_constants(result.constants)
    off_panel = random_chart_points(tuned, 20, np.random.default_rng(99))
    assert panel_residual(tuned, tuned.constants, off_panel) < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("base", ["S4", "CP2"])
def test_asd_bundle_metrics_are_ricci_flat_after_fitting(base):
    spec = asd_bundle_spec(base)
    result = normalization_search(spec, panel_seed=0, threshold=1e-5)
    assert result.residual < 1e-5


@pytest.mark.slow
def test_wrong_exponents_cannot_be_fitted():
    result = normalization_search(spin_bundle_spec(exponents=ASD_EXPONENTS), panel_seed=0, restarts=1)
    assert result.residual > 1e-2


def test_asd_frame_forms_are_anti_self_dual():
    forms = asd_frame_forms()
    assert len(forms) == 3
    for omega in forms:
        assert omega.norm_inf() > 0.0
        assert (hodge_star(omega) + omega).norm_inf() < 1e-14


@pytest.mark.parametrize("spec", [spin_bundle_spec(), asd_bundle_spec("S4"), asd_bundle_spec("CP2")])
def test_search_starts_avoid_the_analytic_constants(spec):
    for cb, c_conn in SEARCH_STARTS:
        assert abs(math.log(cb / spec.constants.c_b)) > 0.5
        assert abs(c_conn - spec.constants.c_conn) > 0.25
