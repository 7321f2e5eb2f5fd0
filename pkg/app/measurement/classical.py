# ===================================================================================
# Project: Unsharp
# File: app/measurement/classical.py
# Description: This file implements the two classical (fuzzy) representations of the qubit statistical model:
#              the informationally complete embedding ρ ↦ (tr[ρAᵢ])ᵢ with its quantization dual f ↦ Σ fᵢAᵢ, and the
#              barycentric reduction of measures on pure states with its dual E ↦ f_E(ω) = tr[ωE].
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
from typing import Any, Callable, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from config import settings
from app.core.exceptions import DimensionMismatchError, InconsistentDataError, InvalidOperatorError
from app.core.operators import (
    DensityOperator,
    DiscretePOM,
    Effect,
    as_vector3,
    bloch_components,
    bloch_matrix,
    born_probability,
    density_from_bloch,
    pom_probabilities,
)
from app.measurement.sphere import SphereMesh

Violation = Optional[Literal["lower", "upper", "both"]]


# --- Domain Types ---
class PurePoint(BaseModel):
    """Pure qubit state ω = ½(I + bloch·σ) labelled by a unit Bloch vector."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bloch: np.ndarray

    @field_validator("bloch", mode="before")
    @classmethod
    def _unit(cls, value: Any) -> np.ndarray:
        vector = np.array(as_vector3(value))
        length = np.linalg.norm(vector)
        if abs(length - 1.0) > settings.TOLERANCE:
            raise InvalidOperatorError(f"Pure point needs a unit Bloch vector, got length {length:.12g}")
        vector /= length
        vector.setflags(write=False)
        return vector

    def state(self) -> DensityOperator:
        return DensityOperator(matrix=bloch_matrix(0.5, 0.5 * self.bloch))


class ClassicalState(BaseModel):
    """Finite atomic probability measure on the pure states."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    atoms: Tuple[Tuple[PurePoint, float], ...]

    @model_validator(mode="after")
    def _probability(self) -> "ClassicalState":
        if not self.atoms:
            raise InvalidOperatorError("A classical state needs at least one atom")
        weights = self.weights
        if np.any(weights <= 0):
            raise InvalidOperatorError("Atom weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidOperatorError(f"Atom weights sum to {weights.sum():.15g}, expected 1")
        return self

    @classmethod
    def from_arrays(cls, blochs: Sequence[Sequence[float]], weights: Sequence[float]) -> "ClassicalState":
        if len(blochs) != len(weights):
            raise InvalidOperatorError("Need one weight per atom")
        return cls(atoms=tuple((PurePoint(bloch=b), float(w)) for b, w in zip(blochs, weights)))

    @property
    def points(self) -> np.ndarray:
        return np.array([point.bloch for point, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([weight for _, weight in self.atoms])


class ClassicalEffect(BaseModel):
    """Function on the pure states; proper classical effects take values in [0, 1].

    ``affine`` holds (a0, a) when the function is bloch ↦ a0 + a·bloch, enabling vectorized evaluation.
    ``extended`` functions may leave [0, 1].
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[PurePoint], float]
    extended: bool = False
    affine: Optional[Tuple[float, np.ndarray]] = None

    @model_validator(mode="after")
    def _check_range(self) -> "ClassicalEffect":
        if self.extended or self.affine is None:
            return self
        a0, a = self.affine
        low, high = a0 - float(np.linalg.norm(a)), a0 + float(np.linalg.norm(a))
        tol = settings.TOLERANCE
        if low < -tol or high > 1.0 + tol:
            raise InvalidOperatorError(f"Classical effect ranges over [{low:.6g}, {high:.6g}]; mark it extended")
        return self

    def __call__(self, point: PurePoint) -> float:
        return float(self.evaluator(point))

    def on_bloch(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.affine is not None:
            a0, a = self.affine
            return a0 + points @ a
        return np.array([self(PurePoint(bloch=p)) for p in points])


class ICObservable(BaseModel):
    """Informationally complete qubit POM with its frame matrix.

    Row i of ``frame_matrix`` is (α0ᵢ, αᵢ) for Aᵢ = α0ᵢ·I + αᵢ·σ, so that p = frame_matrix @ (1, r)
    for ρ = ½(I + r·σ).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pom: DiscretePOM
    frame_matrix: np.ndarray

    @model_validator(mode="after")
    def _complete(self) -> "ICObservable":
        if self.pom.dim != 2:
            raise DimensionMismatchError("Only qubit IC observables are supported")
        if len(self.pom.outcomes) < 4:
            raise InvalidOperatorError("An IC qubit observable needs at least 4 outcomes")
        if np.linalg.matrix_rank(self.frame_matrix, tol=1e-10) != 4:
            raise InvalidOperatorError("Frame matrix is rank deficient: observable is not informationally complete")
        return self

    @classmethod
    def from_pom(cls, pom: DiscretePOM) -> "ICObservable":
        rows = []
        for effect in pom.effects:
            a0, a = bloch_components(effect.matrix)
            rows.append([a0, *a])
        frame = np.array(rows)
        frame.setflags(write=False)
        return cls(pom=pom, frame_matrix=frame)


class Quantization(BaseModel):
    """Result of f ↦ Σ fᵢAᵢ; the operator need not be an effect."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    operator: np.ndarray
    effect: Optional[Effect]
    proper: bool
    violated: Violation = None

    @property
    def is_effect(self) -> bool:
        return self.effect is not None


class Witness(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: np.ndarray
    proper: bool
    violated: Violation = None


class Relabeling(BaseModel):
    """Orthogonal point map of the Bloch sphere (rotation or antipodal map)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _orthogonal(cls, value: Any) -> np.ndarray:
        matrix = np.array(value, dtype=float)
        if matrix.shape != (3, 3) or np.max(np.abs(matrix @ matrix.T - np.eye(3))) > 1e-10:
            raise InvalidOperatorError("Relabeling must be an orthogonal 3×3 matrix")
        matrix.setflags(write=False)
        return matrix

    def __call__(self, point: PurePoint) -> PurePoint:
        return PurePoint(bloch=self.matrix @ point.bloch)


# --- Constructors ---
def tetrahedral_observable() -> ICObservable:
    """Aᵢ = ¼(I + tᵢ·σ) with t₁ = ẑ and t₂,₃,₄ at z = −⅓ spaced 120° in azimuth."""
    radius = 2.0 * np.sqrt(2.0) / 3.0
    directions = [np.array([0.0, 0.0, 1.0])] + [
        np.array([radius * np.cos(phi), radius * np.sin(phi), -1.0 / 3.0])
        for phi in (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)
    ]
    pom = DiscretePOM(
        outcomes=(1, 2, 3, 4),
        effects=tuple(Effect(matrix=bloch_matrix(0.25, 0.25 * t)) for t in directions),
    )
    return ICObservable.from_pom(pom)


def rotation_relabeling(rotation: Any) -> Relabeling:
    return Relabeling(matrix=rotation)


def antipodal_relabeling() -> Relabeling:
    return Relabeling(matrix=-np.eye(3))


def _bound_violation(values: np.ndarray, tol: float) -> Violation:
    below = bool(np.any(values < -tol))
    above = bool(np.any(values > 1.0 + tol))
    if below and above:
        return "both"
    if below:
        return "lower"
    if above:
        return "upper"
    return None


# --- Embedding and quantization ---
def embed(rho: DensityOperator, a: ICObservable) -> np.ndarray:
    """ρ ↦ (tr[ρAᵢ])ᵢ"""
    if rho.dim != a.pom.dim:
        raise DimensionMismatchError(f"State dimension {rho.dim} does not match observable dimension {a.pom.dim}")
    return pom_probabilities(rho, a.pom)


def reconstruct(p: Sequence[float], a: ICObservable) -> DensityOperator:
    """Unique state with embed(ρ) = p, by least squares against the frame matrix."""
    tol = settings.RECONSTRUCT_TOL
    p = np.asarray(p, dtype=float)
    if p.shape != (len(a.pom.outcomes),):
        raise DimensionMismatchError(f"Expected {len(a.pom.outcomes)} probabilities, got shape {p.shape}")
    if abs(p.sum() - 1.0) > tol:
        raise InconsistentDataError(f"Probabilities sum to {p.sum():.12g}, expected 1")

    frame = a.frame_matrix
    r, *_ = np.linalg.lstsq(frame[:, 1:], p - frame[:, 0], rcond=None)
    residual = float(np.max(np.abs(frame[:, 0] + frame[:, 1:] @ r - p)))
    if residual > tol:
        raise InconsistentDataError(f"Probability vector is outside the range of the embedding (residual {residual:.3e})")
    length = float(np.linalg.norm(r))
    if length > 1.0 + tol:
        raise InconsistentDataError(f"Reconstructed Bloch vector has length {length:.12g} > 1")
    if length > 1.0:
        r = r / length
    logging.info(f"Reconstructed state with Bloch vector {np.round(r, 12).tolist()}")
    return density_from_bloch(r)


def quantize(f: Sequence[float], a: ICObservable) -> Quantization:
    """f ↦ Σ fᵢAᵢ, flagging whether the result is an effect and whether f is a proper classical effect."""
    f = np.asarray(f, dtype=float)
    if f.shape != (len(a.pom.outcomes),) or not np.all(np.isfinite(f)):
        raise DimensionMismatchError(f"Expected {len(a.pom.outcomes)} finite values, got {f!r}")
    operator = np.tensordot(f, np.stack([e.matrix for e in a.pom.effects]), axes=1)
    try:
        effect = Effect(matrix=operator)
    except ValueError:
        effect = None
    violated = _bound_violation(f, settings.TOLERANCE)
    return Quantization(operator=operator, effect=effect, proper=violated is None, violated=violated)


def surjectivity_witness(target: Effect, a: ICObservable) -> Witness:
    """Solve Σ fᵢAᵢ = target; f is unique for a 4-outcome frame."""
    if target.dim != 2:
        raise DimensionMismatchError("Witness search needs a qubit effect")
    t0, t = bloch_components(target.matrix)
    rhs = np.concatenate([[t0], t])
    f, *_ = np.linalg.lstsq(a.frame_matrix.T, rhs, rcond=None)
    residual = float(np.max(np.abs(a.frame_matrix.T @ f - rhs)))
    if residual > settings.RECONSTRUCT_TOL:
        raise InconsistentDataError(f"Target effect is outside the span of the observable (residual {residual:.3e})")
    violated = _bound_violation(f, settings.TOLERANCE)
    return Witness(f=f, proper=violated is None, violated=violated)


# --- Reduction to density operators ---
def barycenter(mu: ClassicalState) -> np.ndarray:
    return mu.weights @ mu.points


def misra_reduce(mu: ClassicalState) -> DensityOperator:
    """μ ↦ ∫ ω dμ(ω) = Σ wₖ·½(I + rₖ·σ)"""
    return density_from_bloch(barycenter(mu))


def misra_dual(e: Effect) -> ClassicalEffect:
    """E ↦ f_E with f_E(ω) = tr[ωE]; for qubits f_E(r) = a0 + a·r."""
    if e.dim != 2:
        raise DimensionMismatchError("Pure-point functions are defined for qubit effects")
    a0, a = bloch_components(e.matrix)
    return ClassicalEffect(evaluator=lambda point: born_probability(point.state(), e), affine=(a0, a))


def misra_dual_extended(operator: Any) -> ClassicalEffect:
    """ω ↦ tr[ωX] for any Hermitian 2×2 X, e.g. an improper quantization; extended unless X is an effect."""
    matrix = np.asarray(operator, dtype=complex)
    if matrix.shape != (2, 2):
        raise DimensionMismatchError(f"Pure-point functions need a 2×2 operator, got shape {matrix.shape}")
    if np.max(np.abs(matrix - matrix.conj().T)) > settings.TOLERANCE:
        raise InvalidOperatorError("Operator is not Hermitian")
    a0, a = bloch_components(matrix)
    extended = a0 - np.linalg.norm(a) < -settings.TOLERANCE or a0 + np.linalg.norm(a) > 1.0 + settings.TOLERANCE
    return ClassicalEffect(
        evaluator=lambda point: float(np.trace(point.state().matrix @ matrix).real),
        extended=bool(extended),
        affine=(a0, a),
    )


def misra_atoms(rho: DensityOperator) -> ClassicalState:
    """Classical state on the eigenvectors of ρ weighted by its eigenvalues."""
    if rho.dim != 2:
        raise DimensionMismatchError("Pure-point measures are defined for qubit states")
    values, vectors = np.linalg.eigh(rho.matrix)
    atoms = []
    for value, vector in zip(values, vectors.T):
        if value > 1e-15:
            projector = np.outer(vector, vector.conj())
            atoms.append((2.0 * bloch_components(projector)[1], float(value)))
    total = sum(weight for _, weight in atoms)
    return ClassicalState.from_arrays([b for b, _ in atoms], [w / total for _, w in atoms])


def mesh_classical_state(density: Callable[[np.ndarray], np.ndarray], mesh: SphereMesh) -> ClassicalState:
    """Discretize a density on the sphere onto mesh cell centers, weighted by solid angle."""
    values = np.asarray(density(mesh.centers), dtype=float) * mesh.solid_angles
    if values.shape != (len(mesh),) or np.any(values < 0) or not np.all(np.isfinite(values)):
        raise InvalidOperatorError("Density must give one finite nonnegative value per mesh cell")
    keep = values > 0
    if not np.any(keep):
        raise InvalidOperatorError("Density vanishes on every mesh cell")
    weights = values[keep] / values[keep].sum()
    return ClassicalState.from_arrays(mesh.centers[keep], weights)


def _check_invertible(iota: Callable[[PurePoint], PurePoint], points: np.ndarray) -> None:
    images = np.array([iota(PurePoint(bloch=p)).bloch for p in points])
    source_gaps = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    image_gaps = np.linalg.norm(images[:, None, :] - images[None, :, :], axis=-1)
    if np.any((source_gaps > 1e-9) & (image_gaps <= 1e-9)):
        raise InconsistentDataError("Relabeling is not invertible: distinct points share an image")


def relabeled_reduce(mu: ClassicalState, iota: Callable[[PurePoint], PurePoint]) -> DensityOperator:
    """Reduction of the pushed-forward measure μ∘ι⁻¹."""
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(32, 3))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    _check_invertible(iota, np.vstack([mu.points, samples]))
    pushed = ClassicalState(atoms=tuple((iota(point), weight) for point, weight in mu.atoms))
    return misra_reduce(pushed)


def duality_check(mu: ClassicalState, e: Effect) -> Tuple[float, float]:
    """(tr[ρ_μ E], Σ wₖ f_E(ωₖ)); the two agree."""
    lhs = born_probability(misra_reduce(mu), e)
    f_e = misra_dual(e)
    rhs = float(sum(weight * f_e(point) for point, weight in mu.atoms))
    return lhs, rhs
