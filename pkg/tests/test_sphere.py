import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from config import settings
from app.core.exceptions import InvalidOperatorError
from app.core.operators import IDENTITY, SIGMA_Z, matrix_to_qubit_effect, random_unit_vector
from app.measurement.joint import jm_unbiased_sum_form, margins_of_joint
from app.measurement.sphere import (
    SphereRegion,
    cells_where,
    covariant_effect,
    hemisphere_binary_pom,
    hemisphere_joint_pom,
    icosahedral_mesh,
    monte_carlo_effect,
    pairwise_hemisphere_jm,
    rotate_region,
    spin_rotation,
    verify_smearing,
)


@pytest.fixture(scope="module")
def mesh():
    return icosahedral_mesh()


def test_mesh_covers_sphere(mesh):
    assert len(mesh) == 1280
    assert mesh.solid_angles.sum() == pytest.approx(4 * np.pi, abs=1e-6)
    assert np.all(mesh.solid_angles > 0)
    assert np.allclose(np.linalg.norm(mesh.centers, axis=1), 1.0)


def test_mesh_is_cached():
    assert icosahedral_mesh(1) is icosahedral_mesh(1)
    assert len(icosahedral_mesh(0)) == 20


def test_hemisphere_effect_is_exact():
    effect = covariant_effect(SphereRegion.hemisphere([0, 0, 1]))
    assert np.allclose(effect.matrix, np.diag([0.75, 0.25]), atol=1e-15)


def test_full_sphere_is_identity(mesh):
    assert np.allclose(covariant_effect(SphereRegion.full_sphere()).matrix, IDENTITY, atol=1e-15)
    everything = SphereRegion.mesh_cells(mesh, range(len(mesh)))
    assert np.allclose(covariant_effect(everything).matrix, IDENTITY, atol=1e-6)


def test_cap_closed_form():
    effect = covariant_effect(SphereRegion.cap([0, 0, 1], np.pi / 3))
    assert np.allclose(effect.matrix, 0.25 * IDENTITY + 3 / 16 * SIGMA_Z, atol=1e-12)


def test_cap_matches_monte_carlo():
    region = SphereRegion.cap([1, 2, 2], np.pi / 3)
    exact = matrix_to_qubit_effect(covariant_effect(region))
    estimate, stderr = monte_carlo_effect(region, samples=200_000, seed=7)
    sampled = matrix_to_qubit_effect(estimate)
    assert abs(sampled.a0 - exact.a0) < 4 * stderr[0]
    assert np.all(np.abs(sampled.a - exact.a) < 4 * stderr[1:] + 1e-12)


def test_monte_carlo_is_seeded():
    region = SphereRegion.hemisphere([0, 1, 0])
    first, _ = monte_carlo_effect(region, samples=10_000, seed=3)
    second, _ = monte_carlo_effect(region, samples=10_000, seed=3)
    assert np.array_equal(first.matrix, second.matrix)


def test_mesh_quadrature_matches_cap(mesh):
    axis = np.array([0.0, 0.0, 1.0])
    cells = cells_where(mesh, lambda centers: centers @ axis >= 0.5)
    quadrature = matrix_to_qubit_effect(covariant_effect(SphereRegion.mesh_cells(mesh, cells)))
    exact = matrix_to_qubit_effect(covariant_effect(SphereRegion.cap(axis, np.pi / 3)))
    # Cells are whole triangles, so the quadrature region only approximates the cap boundary
    assert quadrature.a0 == pytest.approx(exact.a0, abs=0.02)
    assert np.allclose(quadrature.a, exact.a, atol=0.02)


def test_mesh_additivity(mesh, rng):
    cells = rng.permutation(len(mesh))
    first, second = cells[:500], cells[500:900]
    union = np.concatenate([first, second])
    total = covariant_effect(SphereRegion.mesh_cells(mesh, union)).matrix
    parts = (
        covariant_effect(SphereRegion.mesh_cells(mesh, first)).matrix
        + covariant_effect(SphereRegion.mesh_cells(mesh, second)).matrix
    )
    assert np.allclose(total, parts, atol=1e-12)


def test_rotation_covariance(rng):
    for _ in range(20):
        rotation = Rotation.from_rotvec(rng.normal(size=3))
        region = SphereRegion.cap(random_unit_vector(rng), rng.uniform(0, np.pi))
        u = spin_rotation(rotation)
        conjugated = u @ covariant_effect(region).matrix @ u.conj().T
        rotated = covariant_effect(rotate_region(region, rotation)).matrix
        assert np.allclose(conjugated, rotated, atol=1e-9)


def test_spin_rotation_is_unitary():
    u = spin_rotation(Rotation.from_rotvec([0.3, -1.2, 0.4]))
    assert np.allclose(u @ u.conj().T, IDENTITY)


@pytest.mark.parametrize("n0", [[0, 0, 1], [1, 0, 0], [0.3, -0.4, 0.866]])
def test_hemisphere_pom(n0):
    pom = hemisphere_binary_pom(n0)
    assert np.allclose(sum(e.matrix for e in pom.effects), IDENTITY, atol=1e-15)
    assert verify_smearing(n0)


def test_hemisphere_pom_along_x_is_unbiased():
    plus = matrix_to_qubit_effect(hemisphere_binary_pom([1, 0, 0]).effect("+"))
    assert plus.a0 == pytest.approx(0.5)
    assert np.allclose(plus.a, [0.25, 0, 0])


def test_verify_smearing_random_axes(rng):
    assert all(verify_smearing(random_unit_vector(rng)) for _ in range(100))


@pytest.mark.parametrize("n0p", [[1, 0, 0], [0, 0, 1], [0, 0, -1], [0.6, 0.8, 0.0]])
def test_pairwise_hemisphere_effects_coexist(n0p):
    report = pairwise_hemisphere_jm([0, 0, 1], n0p)
    assert report.verdict == settings.VERDICT_JOINTLY_MEASURABLE


def test_pairwise_z_x_sum_form():
    _, value = jm_unbiased_sum_form([0, 0, 0.25], [0.25, 0, 0])
    assert value == pytest.approx(np.sqrt(2) / 2)


def test_hemisphere_joint_pom_reproduces_margins(rng, mesh):
    for _ in range(10):
        n0, n0p = random_unit_vector(rng), random_unit_vector(rng)
        first, second = margins_of_joint(hemisphere_joint_pom(n0, n0p))
        assert np.allclose(first.effect("+").matrix, hemisphere_binary_pom(n0).effect("+").matrix, atol=1e-12)
        assert np.allclose(second.effect("+").matrix, hemisphere_binary_pom(n0p).effect("+").matrix, atol=1e-12)

    # Lune cells against quadrature on the mesh
    n0, n0p = np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
    lune = hemisphere_joint_pom(n0, n0p).effect(("+", "-")).matrix
    cells = cells_where(mesh, lambda c: (c @ n0 >= 0) & (c @ n0p < 0))
    quadrature = covariant_effect(SphereRegion.mesh_cells(mesh, cells)).matrix
    assert np.allclose(lune, quadrature, atol=0.02)


def test_region_validation():
    with pytest.raises(ValueError):
        SphereRegion.cap([0, 0, 0], 0.5)
    with pytest.raises(ValueError):
        SphereRegion.cap([0, 0, 1], 4.0)
    with pytest.raises(InvalidOperatorError):
        rotate_region(SphereRegion.mesh_cells(icosahedral_mesh(0), [0, 1]), np.eye(3))


@pytest.mark.slow
def test_hemisphere_matches_monte_carlo_at_full_scale():
    region = SphereRegion.hemisphere([0, 0, 1])
    exact = matrix_to_qubit_effect(covariant_effect(region))
    estimate, stderr = monte_carlo_effect(region, samples=10 ** 6, seed=2024)
    sampled = matrix_to_qubit_effect(estimate)
    assert abs(sampled.a0 - exact.a0) < 3 * stderr[0]
    assert np.all(np.abs(sampled.a - exact.a) < 3 * stderr[1:])


@pytest.mark.slow
def test_sampled_hemisphere_pairs_coexist(rng):
    for _ in range(1000):
        n0, n0p = random_unit_vector(rng), random_unit_vector(rng)
        assert pairwise_hemisphere_jm(n0, n0p).is_jointly_measurable
        holds, value = jm_unbiased_sum_form(0.25 * n0, 0.25 * n0p)
        assert holds and value <= 1.0
