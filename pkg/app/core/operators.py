# ===================================================================================
# Project: Unsharp
# File: app/core/operators.py
# Description: This file contains the finite-dimensional operator algebra: effects, density operators,
#              qubit (Bloch) parametrization, discrete POMs, the Born rule and smearing by confusion kernels.
#              All domain types are frozen pydantic models validated at construction.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
from typing import Any, Hashable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from config import settings
from app.core.exceptions import DimensionMismatchError, InvalidOperatorError

TOL = settings.TOLERANCE
MAX_DIM = 8

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


# --- Helper Functions ---
def as_complex_matrix(value: Any) -> np.ndarray:
    """Convert an array-like to a read-only square complex matrix with finite entries."""
    matrix = np.array(value, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise InvalidOperatorError(f"Operator must be a non-empty square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > MAX_DIM:
        raise InvalidOperatorError(f"Operator dimension {matrix.shape[0]} exceeds supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidOperatorError("Operator has NaN or infinite entries")
    matrix.setflags(write=False)
    return matrix


def as_vector3(value: Any) -> np.ndarray:
    """Convert an array-like to a read-only real 3-vector."""
    vector = np.array(value, dtype=float).reshape(-1)
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise InvalidOperatorError(f"Expected a finite real 3-vector, got {value!r}")
    vector.setflags(write=False)
    return vector


def unit_vector(value: Any) -> np.ndarray:
    """Normalize a nonzero 3-vector."""
    vector = np.array(as_vector3(value))
    length = np.linalg.norm(vector)
    if length < TOL:
        raise InvalidOperatorError("Axis must be a nonzero vector")
    vector = vector / length
    vector.setflags(write=False)
    return vector


def hermiticity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    dim 2 uses the trace/determinant closed form; larger dimensions use the Hermitian eigensolver.
    """
    if matrix.shape == (2, 2):
        half_trace = 0.5 * (matrix[0, 0].real + matrix[1, 1].real)
        half_gap = np.hypot(0.5 * (matrix[0, 0].real - matrix[1, 1].real), abs(matrix[0, 1]))
        return np.array([half_trace - half_gap, half_trace + half_gap])
    return np.linalg.eigvalsh(matrix)


def operator_norm(matrix: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(matrix, 2))


def operator_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Square root of a positive operator via eigendecomposition; eigenvalues down to -1e-12 clip to 0."""
    values, vectors = np.linalg.eigh(matrix)
    if np.min(values) < -1e-12:
        raise InvalidOperatorError(f"Cannot take square root: eigenvalue {np.min(values):.3e} is negative")
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def bloch_matrix(a0: float, a: Sequence[float]) -> np.ndarray:
    """a0·I + a·σ"""
    return a0 * IDENTITY + np.tensordot(np.asarray(a, dtype=float), PAULI, axes=1)


def bloch_components(matrix: np.ndarray) -> Tuple[float, np.ndarray]:
    """Inverse of bloch_matrix for a 2×2 Hermitian matrix."""
    a0 = 0.5 * float(np.trace(matrix).real)
    a = np.array([0.5 * float(np.trace(sigma @ matrix).real) for sigma in PAULI])
    return a0, a


# --- Domain Types ---
class Effect(BaseModel):
    """Hermitian operator with spectrum in [0, 1]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _validate(cls, value: Any) -> np.ndarray:
        matrix = as_complex_matrix(value)
        defect = hermiticity_defect(matrix)
        if defect > TOL:
            raise InvalidOperatorError(f"Effect is not Hermitian (defect {defect:.3e})")
        spectrum = hermitian_eigenvalues(matrix)
        if spectrum[0] < -TOL or spectrum[-1] > 1 + TOL:
            raise InvalidOperatorError(
                f"Effect spectrum [{spectrum[0]:.6g}, {spectrum[-1]:.6g}] is outside [0, 1]"
            )
        return matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigenvalues(self.matrix)

    def complement(self) -> "Effect":
        return Effect(matrix=np.eye(self.dim) - self.matrix)

    def is_projection(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.matrix @ self.matrix - self.matrix)) <= tol)


class DensityOperator(BaseModel):
    """Positive semidefinite operator of unit trace."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _validate(cls, value: Any) -> np.ndarray:
        matrix = as_complex_matrix(value)
        defect = hermiticity_defect(matrix)
        if defect > TOL:
            raise InvalidOperatorError(f"Density operator is not Hermitian (defect {defect:.3e})")
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > TOL:
            raise InvalidOperatorError(f"Density operator has trace {trace:.12g}, expected 1")
        if hermitian_eigenvalues(matrix)[0] < -TOL:
            raise InvalidOperatorError("Density operator is not positive semidefinite")
        return matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise DimensionMismatchError("Bloch vector is defined for qubit states only")
        return 2.0 * bloch_components(self.matrix)[1]


class QubitEffect(BaseModel):
    """Bloch parametrization A = a0·I + a·σ of a 2×2 effect; requires |a| ≤ min(a0, 1 − a0)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a0: float
    a: np.ndarray

    @field_validator("a", mode="before")
    @classmethod
    def _vector(cls, value: Any) -> np.ndarray:
        return as_vector3(value)

    @model_validator(mode="after")
    def _effect_bound(self) -> "QubitEffect":
        if not np.isfinite(self.a0):
            raise InvalidOperatorError("a0 must be finite")
        bound = min(self.a0, 1.0 - self.a0)
        if self.norm > bound + TOL:
            raise InvalidOperatorError(
                f"|a| = {self.norm:.12g} exceeds min(a0, 1 - a0) = {bound:.12g}; not an effect"
            )
        return self

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.a))

    def complement(self) -> "QubitEffect":
        return QubitEffect(a0=1.0 - self.a0, a=-self.a)


class DiscretePOM(BaseModel):
    """Finite outcome set mapped to effects summing to the identity."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    outcomes: Tuple[Hashable, ...]
    effects: Tuple[Effect, ...]

    @model_validator(mode="after")
    def _normalized(self) -> "DiscretePOM":
        if len(self.outcomes) != len(self.effects) or not self.effects:
            raise InvalidOperatorError("POM needs one effect per outcome and at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise InvalidOperatorError("POM outcome labels must be distinct")
        dims = {effect.dim for effect in self.effects}
        if len(dims) != 1:
            raise DimensionMismatchError(f"POM effects have mixed dimensions {sorted(dims)}")
        total = sum(effect.matrix for effect in self.effects)
        defect = float(np.max(np.abs(total - np.eye(self.dim))))
        if defect > TOL:
            raise InvalidOperatorError(f"POM effects do not sum to identity (defect {defect:.3e})")
        return self

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def effect(self, outcome: Hashable) -> Effect:
        try:
            return self.effects[self.outcomes.index(outcome)]
        except ValueError:
            raise KeyError(f"Unknown outcome {outcome!r}") from None

    def is_projective(self, tol: float = TOL) -> bool:
        return all(effect.is_projection(tol) for effect in self.effects)


# --- Constructors ---
def projector(n: Sequence[float]) -> Effect:
    """P(n) = ½(I + n·σ) for a unit vector n."""
    return Effect(matrix=bloch_matrix(0.5, 0.5 * unit_vector(n)))


def density_from_bloch(r: Sequence[float]) -> DensityOperator:
    r = as_vector3(r)
    if np.linalg.norm(r) > 1 + TOL:
        raise InvalidOperatorError(f"Bloch vector length {np.linalg.norm(r):.12g} exceeds 1")
    return DensityOperator(matrix=bloch_matrix(0.5, 0.5 * r))


def sharp_binary_pom(n: Sequence[float]) -> DiscretePOM:
    """Sharp spin observable along n with outcomes '+' and '-'."""
    n = unit_vector(n)
    return DiscretePOM(outcomes=("+", "-"), effects=(projector(n), projector(-n)))


def binary_pom(effect: Effect) -> DiscretePOM:
    """Simple observable {E, I − E}."""
    return DiscretePOM(outcomes=("+", "-"), effects=(effect, effect.complement()))


# --- Operations ---
def born_probability(rho: DensityOperator, e: Effect) -> float:
    """prob = tr[ρE]"""
    if rho.dim != e.dim:
        raise DimensionMismatchError(f"State dimension {rho.dim} does not match effect dimension {e.dim}")
    value = np.trace(rho.matrix @ e.matrix)
    if abs(value.imag) >= TOL:
        raise InvalidOperatorError(f"Born probability has imaginary part {value.imag:.3e}")
    return float(value.real)


def pom_probabilities(rho: DensityOperator, pom: DiscretePOM) -> np.ndarray:
    return np.array([born_probability(rho, effect) for effect in pom.effects])


def qubit_effect_to_matrix(q: QubitEffect) -> Effect:
    return Effect(matrix=bloch_matrix(q.a0, q.a))


def matrix_to_qubit_effect(e: Effect) -> QubitEffect:
    if e.dim != 2:
        raise DimensionMismatchError(f"Bloch parametrization needs a 2×2 effect, got dim {e.dim}")
    a0, a = bloch_components(e.matrix)
    return QubitEffect(a0=a0, a=a)


def single_shot_distinguishable(rho1: DensityOperator, rho2: DensityOperator) -> bool:
    """True iff the supports are orthogonal, i.e. ‖ρ1·ρ2‖ vanishes."""
    if rho1.dim != rho2.dim:
        raise DimensionMismatchError(f"States have dimensions {rho1.dim} and {rho2.dim}")
    return operator_norm(rho1.matrix @ rho2.matrix) <= settings.TOLERANCE


def commutator_norm(first: Effect, second: Effect) -> float:
    if first.dim != second.dim:
        raise DimensionMismatchError(f"Effects have dimensions {first.dim} and {second.dim}")
    a, b = first.matrix, second.matrix
    return operator_norm(a @ b - b @ a)


def trace_distance(rho1: DensityOperator, rho2: DensityOperator) -> float:
    if rho1.dim != rho2.dim:
        raise DimensionMismatchError(f"States have dimensions {rho1.dim} and {rho2.dim}")
    return 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(rho1.matrix - rho2.matrix))))


def validate_stochastic(confusion: Any, size: Optional[int] = None) -> np.ndarray:
    """Check a row-stochastic matrix: entries in [0, 1], rows summing to 1."""
    kernel = np.array(confusion, dtype=float)
    if kernel.ndim != 2 or (size is not None and kernel.shape[0] != size):
        raise InvalidOperatorError(f"Confusion matrix has shape {kernel.shape}, expected {size} rows")
    if np.any(kernel < -TOL) or np.any(kernel > 1 + TOL):
        raise InvalidOperatorError("Confusion matrix entries must lie in [0, 1]")
    if np.max(np.abs(kernel.sum(axis=1) - 1.0)) > TOL:
        raise InvalidOperatorError("Confusion matrix rows must sum to 1")
    return kernel


def smear(pom: DiscretePOM, confusion: Any) -> DiscretePOM:
    """Post-process a POM by a Markov kernel: output effect j = Σᵢ confusion[i][j]·Eᵢ.

    Output outcomes reuse the input labels, so the kernel must be square.
    """
    kernel = validate_stochastic(confusion, len(pom.outcomes))
    if kernel.shape[1] != kernel.shape[0]:
        raise InvalidOperatorError("Confusion matrix must be square to keep the outcome labels")
    stacked = np.stack([effect.matrix for effect in pom.effects])
    smeared = np.tensordot(kernel.T, stacked, axes=1)
    return DiscretePOM(outcomes=pom.outcomes, effects=tuple(Effect(matrix=m) for m in smeared))


def smear_binary(sharp: DiscretePOM, confusion: Any) -> DiscretePOM:
    """Fuzzy version of a sharp two-outcome observable."""
    if len(sharp.outcomes) != 2:
        raise InvalidOperatorError(f"smear_binary needs a two-outcome POM, got {len(sharp.outcomes)}")
    if not sharp.is_projective():
        raise InvalidOperatorError("smear_binary needs a projection-valued POM")
    return smear(sharp, confusion)


# --- Sampling ---
def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        length = np.linalg.norm(v)
        if length > 1e-12:
            return v / length


def random_qubit_effect(rng: np.random.Generator) -> QubitEffect:
    """a0 ~ U(0,1), uniform direction, |a| ~ U(0, min(a0, 1 − a0))."""
    a0 = rng.uniform(0.0, 1.0)
    length = rng.uniform(0.0, min(a0, 1.0 - a0))
    return QubitEffect(a0=a0, a=length * random_unit_vector(rng))


def random_density(rng: np.random.Generator, dim: int = 2) -> DensityOperator:
    """Random mixed state: normalized Wishart matrix (Hilbert–Schmidt measure)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T) / np.trace(rho).real
    return DensityOperator(matrix=rho)
