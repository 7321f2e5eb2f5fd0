import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from app.core.exceptions import InconsistentDataError, InvalidOperatorError
from app.core.operators import (
    IDENTITY,
    DiscretePOM,
    Effect,
    bloch_matrix,
    born_probability,
    density_from_bloch,
    projector,
    qubit_effect_to_matrix,
    random_density,
    random_qubit_effect,
    random_unit_vector,
    trace_distance,
)
from app.measurement.classical import (
    ClassicalEffect,
    ClassicalState,
    ICObservable,
    PurePoint,
    Relabeling,
    antipodal_relabeling,
    barycenter,
    duality_check,
    embed,
    mesh_classical_state,
    misra_atoms,
    misra_dual,
    misra_dual_extended,
    misra_reduce,
    quantize,
    reconstruct,
    relabeled_reduce,
    rotation_relabeling,
    surjectivity_witness,
    tetrahedral_observable,
)
from app.measurement.sphere import icosahedral_mesh

Z, X = [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]


@pytest.fixture(scope="module")
def tetra():
    return tetrahedral_observable()


def _random_state(rng, atoms=10):
    weights = rng.uniform(0.1, 1.0, size=atoms)
    return ClassicalState.from_arrays([random_unit_vector(rng) for _ in range(atoms)], weights / weights.sum())


# --- Informationally complete embedding ---
def test_embed_examples(tetra):
    assert embed(density_from_bloch([0, 0, 0]), tetra) == pytest.approx([0.25] * 4)
    assert embed(density_from_bloch(Z), tetra) == pytest.approx([0.5, 1 / 6, 1 / 6, 1 / 6])


def test_embed_sums_to_one(tetra, rng):
    for _ in range(20):
        p = embed(random_density(rng), tetra)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(p >= -1e-12)


def test_reconstruct_examples(tetra):
    rho = reconstruct([0.25] * 4, tetra)
    assert np.allclose(rho.matrix, 0.5 * IDENTITY, atol=1e-12)
    up = density_from_bloch(Z)
    assert trace_distance(reconstruct(embed(up, tetra), tetra), up) <= 1e-10


def test_reconstruct_round_trip(tetra, rng):
    for _ in range(50):
        rho = random_density(rng)
        assert trace_distance(reconstruct(embed(rho, tetra), tetra), rho) <= 1e-10


@pytest.mark.parametrize(
    "p",
    [
        [0.3, 0.3, 0.3, 0.3],
        [1.0, 0.0, 0.0, 0.0],
    ],
)
def test_reconstruct_rejects_inconsistent_data(tetra, p):
    with pytest.raises(InconsistentDataError):
        reconstruct(p, tetra)


def test_embedding_is_injective(tetra, rng):
    for _ in range(50):
        rho1, rho2 = random_density(rng), random_density(rng)
        if trace_distance(rho1, rho2) > 1e-6:
            assert np.max(np.abs(embed(rho1, tetra) - embed(rho2, tetra))) > 1e-8


def test_frame_must_be_complete():
    planar = [[np.cos(phi), np.sin(phi), 0.0] for phi in np.arange(4) * np.pi / 2]
    pom = DiscretePOM(outcomes=(1, 2, 3, 4), effects=tuple(Effect(matrix=bloch_matrix(0.25, 0.25 * np.array(t))) for t in planar))
    with pytest.raises(ValueError):
        ICObservable.from_pom(pom)


# --- Quantization ---
def test_quantize_examples(tetra):
    unit = quantize([1, 1, 1, 1], tetra)
    assert np.allclose(unit.operator, IDENTITY, atol=1e-12)
    assert unit.proper and unit.is_effect

    improper = quantize([2, 0, 0, 0], tetra)
    assert np.allclose(improper.operator, projector(Z).matrix, atol=1e-12)
    assert improper.is_effect and not improper.proper
    assert improper.violated == "upper"

    for i in range(4):
        indicator = np.eye(4)[i]
        assert np.allclose(quantize(indicator, tetra).operator, tetra.pom.effects[i].matrix)


def test_quantize_outside_effects(tetra):
    q = quantize([-1, 3, 0, 0], tetra)
    assert q.violated == "both"
    assert not q.is_effect


def test_quantization_duality(tetra, rng):
    for _ in range(50):
        f = rng.uniform(0, 1, size=4)
        rho = random_density(rng)
        q = quantize(f, tetra)
        assert f @ embed(rho, tetra) == pytest.approx(born_probability(rho, q.effect), abs=1e-12)


def test_surjectivity_witness_examples(tetra):
    witness = surjectivity_witness(projector(Z), tetra)
    assert witness.f == pytest.approx([2, 0, 0, 0], abs=1e-12)
    assert not witness.proper
    assert witness.violated == "upper"

    first = surjectivity_witness(tetra.pom.effects[0], tetra)
    assert first.f == pytest.approx([1, 0, 0, 0], abs=1e-12)
    assert first.proper

    half = surjectivity_witness(Effect(matrix=0.5 * IDENTITY), tetra)
    assert half.f == pytest.approx([0.5] * 4, abs=1e-12)
    assert half.proper


# --- Reduction to density operators ---
def test_misra_reduce_examples():
    assert np.allclose(misra_reduce(ClassicalState.from_arrays([Z], [1.0])).matrix, projector(Z).matrix)
    mixed = ClassicalState.from_arrays([Z, [0, 0, -1]], [0.5, 0.5])
    assert np.allclose(misra_reduce(mixed).matrix, 0.5 * IDENTITY)
    tilted = ClassicalState.from_arrays([Z, X], [0.5, 0.5])
    assert np.allclose(misra_reduce(tilted).bloch_vector(), [0.5, 0, 0.5])
    assert np.allclose(barycenter(tilted), [0.5, 0, 0.5])


def test_classical_state_validation():
    with pytest.raises(ValueError):
        ClassicalState.from_arrays([Z, X], [0.5, 0.4])
    with pytest.raises(ValueError):
        ClassicalState.from_arrays([Z, X], [1.5, -0.5])
    with pytest.raises(ValueError):
        PurePoint(bloch=[0, 0, 0.9])


def test_misra_dual_examples():
    f = misra_dual(projector(Z))
    for theta in np.linspace(0, np.pi, 7):
        point = PurePoint(bloch=[np.sin(theta), 0, np.cos(theta)])
        assert f(point) == pytest.approx(np.cos(theta / 2) ** 2, abs=1e-12)
    half = misra_dual(Effect(matrix=0.5 * IDENTITY))
    assert half(PurePoint(bloch=X)) == pytest.approx(0.5)
    assert f(PurePoint(bloch=[0, 0, -1])) == pytest.approx(0.0, abs=1e-12)


def test_misra_dual_is_affine_and_unital(rng):
    points = np.array([random_unit_vector(rng) for _ in range(100)])
    assert np.allclose(misra_dual(Effect(matrix=IDENTITY)).on_bloch(points), 1.0)
    for _ in range(10):
        e = qubit_effect_to_matrix(random_qubit_effect(rng))
        f = qubit_effect_to_matrix(random_qubit_effect(rng))
        lam = rng.uniform()
        mix = misra_dual(Effect(matrix=lam * e.matrix + (1 - lam) * f.matrix)).on_bloch(points)
        assert np.allclose(mix, lam * misra_dual(e).on_bloch(points) + (1 - lam) * misra_dual(f).on_bloch(points))


def test_extended_dual_of_quantized_functions(tetra):
    improper = quantize([-1, 3, 0, 0], tetra)
    f = misra_dual_extended(improper.operator)
    assert f.extended
    a0, a = f.affine
    assert a0 - np.linalg.norm(a) < 0 or a0 + np.linalg.norm(a) > 1
    point = PurePoint(bloch=a / np.linalg.norm(a))
    assert f(point) == pytest.approx(a0 + np.linalg.norm(a), abs=1e-12)

    proper = misra_dual_extended(quantize([2, 0, 0, 0], tetra).operator)
    assert not proper.extended
    assert proper(PurePoint(bloch=Z)) == pytest.approx(1.0, abs=1e-12)


def test_classical_effect_range_is_enforced():
    with pytest.raises(ValueError):
        ClassicalEffect(evaluator=lambda point: 1.5, affine=(1.5, np.zeros(3)))
    loose = ClassicalEffect(evaluator=lambda point: 1.5, affine=(1.5, np.zeros(3)), extended=True)
    assert loose.on_bloch(np.array([Z])) == pytest.approx([1.5])
    with pytest.raises(InvalidOperatorError):
        misra_dual_extended(np.array([[0.5, 0.2], [0.0, 0.5]]))


def test_vectorized_dual_matches_pointwise(rng):
    e = qubit_effect_to_matrix(random_qubit_effect(rng))
    f = misra_dual(e)
    points = np.array([random_unit_vector(rng) for _ in range(20)])
    assert np.allclose(f.on_bloch(points), [f(PurePoint(bloch=p)) for p in points], atol=1e-12)


def test_misra_surjectivity(rng):
    for _ in range(30):
        rho = random_density(rng)
        assert np.allclose(misra_reduce(misra_atoms(rho)).matrix, rho.matrix, atol=1e-12)


def test_every_effect_is_fuzzy(rng):
    points = np.array([random_unit_vector(rng) for _ in range(10_000)])
    for _ in range(10):
        f = misra_dual(qubit_effect_to_matrix(random_qubit_effect(rng))).on_bloch(points)
        assert np.any((f > 0) & (f < 1))
    sharp = misra_dual(projector(random_unit_vector(rng))).on_bloch(points)
    assert np.mean((sharp >= 0.01) & (sharp <= 0.99)) > 0.9


def test_effects_do_not_separate_classical_states(rng):
    poles = ClassicalState.from_arrays([Z, [0, 0, -1]], [0.5, 0.5])
    equator = ClassicalState.from_arrays([X, [-1, 0, 0], [0, 1, 0], [0, -1, 0]], [0.25] * 4)
    assert len(poles.atoms) != len(equator.atoms)
    for _ in range(100):
        e = qubit_effect_to_matrix(random_qubit_effect(rng))
        assert duality_check(poles, e)[0] == pytest.approx(duality_check(equator, e)[0], abs=1e-12)


def test_duality_check_examples(rng):
    assert duality_check(ClassicalState.from_arrays([Z], [1.0]), projector(Z)) == pytest.approx((1.0, 1.0))
    tilted = ClassicalState.from_arrays([Z, X], [0.5, 0.5])
    assert duality_check(tilted, projector(Z)) == pytest.approx((0.75, 0.75))
    for _ in range(20):
        lhs, rhs = duality_check(_random_state(rng), qubit_effect_to_matrix(random_qubit_effect(rng)))
        assert lhs == pytest.approx(rhs, abs=1e-12)


# --- Relabeled reduction ---
def test_relabeled_reduce_identity(rng):
    mu = _random_state(rng)
    same = relabeled_reduce(mu, rotation_relabeling(np.eye(3)))
    assert np.allclose(same.matrix, misra_reduce(mu).matrix, atol=1e-12)


def test_relabeled_reduce_rotation_of_point_mass():
    rotation = Rotation.from_rotvec([0, np.pi / 2, 0]).as_matrix()
    rho = relabeled_reduce(ClassicalState.from_arrays([Z], [1.0]), rotation_relabeling(rotation))
    assert np.allclose(rho.bloch_vector(), [1, 0, 0], atol=1e-12)


def test_relabeled_reduce_antipodal_invariant_measure():
    mu = ClassicalState.from_arrays([Z, [0, 0, -1]], [0.5, 0.5])
    assert np.allclose(relabeled_reduce(mu, antipodal_relabeling()).matrix, 0.5 * IDENTITY, atol=1e-12)


def test_relabeled_reduce_rejects_collapsing_map():
    mu = ClassicalState.from_arrays([Z, X], [0.5, 0.5])
    with pytest.raises(InconsistentDataError):
        relabeled_reduce(mu, lambda point: PurePoint(bloch=Z))


def test_relabeling_must_be_orthogonal():
    with pytest.raises(ValueError):
        Relabeling(matrix=2 * np.eye(3))


# --- Mesh states ---
def test_uniform_mesh_state_reduces_to_maximally_mixed():
    mu = mesh_classical_state(lambda centers: np.ones(len(centers)), icosahedral_mesh())
    assert np.linalg.norm(barycenter(mu)) < 1e-6


def test_mesh_state_of_north_density():
    mu = mesh_classical_state(lambda centers: np.clip(centers[:, 2], 0, None), icosahedral_mesh())
    # Density ∝ cosθ on the upper hemisphere has mean Bloch vector (0, 0, 2/3)
    assert np.allclose(barycenter(mu), [0, 0, 2 / 3], atol=1e-2)


def test_mesh_state_rejects_negative_density():
    with pytest.raises(InvalidOperatorError):
        mesh_classical_state(lambda centers: centers[:, 0], icosahedral_mesh(1))


# --- Full-scale sampling ---
@pytest.mark.slow
def test_reconstruct_round_trip_at_scale(tetra, rng):
    for _ in range(1000):
        rho = random_density(rng)
        assert trace_distance(reconstruct(embed(rho, tetra), tetra), rho) <= 1e-10


@pytest.mark.slow
def test_duality_check_at_scale(rng):
    for _ in range(1000):
        lhs, rhs = duality_check(_random_state(rng), qubit_effect_to_matrix(random_qubit_effect(rng)))
        assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.slow
def test_every_sharp_effect_is_fuzzy_on_pure_states(rng):
    points = np.array([random_unit_vector(rng) for _ in range(10_000)])
    for _ in range(100):
        sharp = misra_dual(projector(random_unit_vector(rng))).on_bloch(points)
        assert np.any((sharp > 0) & (sharp < 1))
        assert np.mean((sharp >= 0.01) & (sharp <= 0.99)) > 0.9
