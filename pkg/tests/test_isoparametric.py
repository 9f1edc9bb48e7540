import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from geometry.errors import InvalidFamilyError, InvalidInputError, UnsupportedError
from geometry.isoparametric import (
    austere_test,
    adjoint_level,
    adjoint_orbit_sample,
    build_family,
    clifford_system,
    cluster_eigenvalues,
    eigenvalues_for_level,
    constancy_sweep,
    family_from_manifest,
    family_g2,
    family_g3,
    family_to_manifest,
    focal_frame,
    focal_point,
    focal_spectrum,
    homogeneity_defect,
    hypersurface_spectrum,
    level_project,
    mean_curvature,
    minimal_level,
    munzner_pde_residuals,
    normalized_eigenvalues,
    random_normal_direction,
    random_sphere_point,
    sample_focal_points,
    tube_check,
)

FAMILIES = [
    ("g1", {}),
    ("g2", {"k": 1}),
    ("g2", {"k": 3}),
    ("g2", {"k": 2, "n": 5}),
    ("g3", {}),
    ("g3-adjoint", {}),
    ("fkm", {"m": 1, "ell": 3}),
    ("fkm", {"m": 2, "ell": 2}),
]


def sphere_points(dim, count, seed=0):
    rng = np.random.default_rng(seed)
    return [random_sphere_point(dim, rng) for _ in range(count)]


@pytest.mark.parametrize("kind,params", FAMILIES)
def test_cartan_munzner_equations(kind, params):
    fam = build_family(kind, **params)
    r1, r2 = munzner_pde_residuals(fam, sphere_points(fam.ambient_dim, 50) + [2.0 * sphere_points(fam.ambient_dim, 1, 9)[0]])
    assert r1 < 1e-9
    assert r2 < 1e-9


@pytest.mark.parametrize("kind,params", FAMILIES)
def test_polynomials_are_homogeneous(kind, params):
    fam = build_family(kind, **params)
    x = sphere_points(fam.ambient_dim, 1, 4)[0]
    assert homogeneity_defect(fam, x, 1.7) < 1e-12


@pytest.mark.parametrize("m", range(1, 9))
def test_clifford_systems_anticommute(m):
    assert clifford_system(m).anticommutator_defect() < 1e-12


def test_clifford_system_outside_table():
    with pytest.raises(UnsupportedError):
        clifford_system(9)


def test_fkm_with_vanishing_multiplicity_is_rejected():
    with pytest.raises(InvalidFamilyError):
        build_family("fkm", m=2, ell=1)


def test_unknown_family_kind():
    with pytest.raises(InvalidInputError):
        build_family("g5")


def test_level_projection_lands_on_the_level():
    fam = family_g3()
    x = level_project(fam, 0.4, sphere_points(8, 1, 2)[0])
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-14)
    assert fam.value(x) == pytest.approx(0.4, abs=1e-12)


def test_level_outside_range():
    with pytest.raises(InvalidInputError):
        level_project(family_g3(), 1.0, sphere_points(8, 1)[0])


@pytest.mark.parametrize("kind,params", [("g2", {"k": 3}), ("g3", {}), ("fkm", {"m": 1, "ell": 3})])
def test_principal_curvatures_are_constant(kind, params):
    report = constancy_sweep(build_family(kind, **params), 0.2, 10, seed=5)
    assert report.failures == 0
    assert report.spread < 1e-8


def test_cartan_hypersurface_has_three_double_curvatures():
    fam = family_g3()
    spectrum = hypersurface_spectrum(fam, level_project(fam, 0.3, sphere_points(8, 1, 6)[0]))
    assert spectrum.multiplicities == [2, 2, 2]
    assert spectrum.separated


def test_focal_distances_add_up():
    fam = family_g3()
    x = level_project(fam, -0.2, sphere_points(8, 1, 7)[0])
    assert tube_check(fam, x).residual < 1e-9


@pytest.mark.parametrize("branch", [1, -1])
def test_focal_points_reach_the_extreme_level(branch):
    fam = family_g2(2, 5)
    x = level_project(fam, 0.1, sphere_points(6, 1, 8)[0])
    assert focal_point(fam, x, branch).value == pytest.approx(branch, abs=1e-10)


def test_veronese_focal_spectrum():
    fam = family_g3()
    rng = np.random.default_rng(12)
    spectra = []
    for focal in sample_focal_points(fam, 1, 3, rng):
        frame = focal_frame(fam, focal.point)
        spectra.append(focal_spectrum(fam, focal.point, random_normal_direction(frame, rng), frame))
    for spectrum in spectra:
        np.testing.assert_allclose(spectrum.values, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-6)
        assert spectrum.multiplicities == [2, 2]
    assert austere_test(spectra).status == "PASS"


@pytest.mark.parametrize(
    "kind,params,expected",
    [("g2", {"k": 2, "n": 5}, [0.0]), ("fkm", {"m": 1, "ell": 3}, [-1.0, 0.0, 1.0])],
)
@pytest.mark.parametrize("branch", [1, -1])
def test_focal_spectrum_matches_the_cotangent_table(kind, params, expected, branch):
    fam = build_family(kind, **params)
    rng = np.random.default_rng(21)
    for focal in sample_focal_points(fam, branch, 2, rng):
        frame = focal_frame(fam, focal.point)
        for _ in range(3):
            spectrum = focal_spectrum(fam, focal.point, random_normal_direction(frame, rng), frame)
            np.testing.assert_allclose(spectrum.values, expected, atol=1e-6)


def test_non_minimal_clifford_torus_is_not_austere():
    fam = family_g2(1)
    rng = np.random.default_rng(2)
    spectra = [hypersurface_spectrum(fam, level_project(fam, 0.5, random_sphere_point(8, rng))) for _ in range(3)]
    assert austere_test(spectra).status == "FAIL"


def test_cartan_minimal_level_is_zero():
    fam = family_g3()
    t = minimal_level(fam, seed=3)
    assert t == pytest.approx(0.0, abs=1e-10)
    assert mean_curvature(fam, level_project(fam, t, sphere_points(8, 1, 1)[0])) == pytest.approx(0.0, abs=1e-8)


def test_adjoint_orbit_sits_on_its_level():
    lam = normalized_eigenvalues([2.0, -0.5, 0.3])
    u = unitary_group.rvs(3, random_state=np.random.default_rng(4))
    x = adjoint_orbit_sample(lam, u)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)
    assert build_family("g3-adjoint").value(x) == pytest.approx(adjoint_level(lam), abs=1e-12)


def test_adjoint_orbit_needs_traceless_eigenvalues():
    with pytest.raises(InvalidInputError):
        adjoint_orbit_sample([1.0, 0.0, 0.0], np.eye(3))


def test_manifest_roundtrip_and_tampering():
    fam = family_g2(3)
    assert family_from_manifest(family_to_manifest(fam)).multiplicities == fam.multiplicities
    with pytest.raises(InvalidFamilyError):
        family_from_manifest("kind = g2\nk = 3\nmultiplicities = 1,5\n")


def test_cluster_eigenvalues_groups_close_values():
    summary = cluster_eigenvalues([1.0, -1.0, 1.0 + 1e-9, 0.0])
    assert summary.values == pytest.approx([-1.0, 0.0, 1.0])
    assert summary.multiplicities == [1, 1, 2]


@pytest.mark.parametrize("t", [-1.0, -0.4, 0.0, 0.7, 1.0])
def test_eigenvalues_for_level(t):
    lam = eigenvalues_for_level(t)
    assert lam.sum() == pytest.approx(0.0, abs=1e-15)
    assert lam @ lam == pytest.approx(1.0, abs=1e-15)
    assert adjoint_level(lam) == pytest.approx(t, abs=1e-14)


def test_focal_levels_have_a_double_eigenvalue():
    lam = np.sort(eigenvalues_for_level(-1.0))
    assert lam[1] == pytest.approx(lam[2], abs=1e-12)
