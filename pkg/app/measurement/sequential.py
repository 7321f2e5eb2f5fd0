# ===================================================================================
# Project: Unsharp
# File: app/measurement/sequential.py
# Description: This file models measurement disturbance at qubit scale: an unsharp Lüders measurement along n
#              followed by a sharp measurement along m. It exposes the effective joint observable, the distorted
#              second observable and the accuracy-versus-disturbance trade-off scan.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
from typing import Hashable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from app.core.exceptions import InvalidOperatorError
from app.core.operators import (
    DensityOperator,
    DiscretePOM,
    Effect,
    as_complex_matrix,
    bloch_matrix,
    born_probability,
    matrix_to_qubit_effect,
    operator_sqrt,
    sharp_binary_pom,
    unit_vector,
)
from app.measurement.joint import GRID_OUTCOMES, jm_unbiased_sum_form, margins_of_joint

ORTHOGONALITY_TOL = 1e-9


class LudersInstrument(BaseModel):
    """POM together with the square roots of its effects; outcome i updates ρ to √Eᵢ ρ √Eᵢ."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pom: DiscretePOM
    sqrt_effects: Tuple[np.ndarray, ...]

    @model_validator(mode="after")
    def _roots(self) -> "LudersInstrument":
        if len(self.sqrt_effects) != len(self.pom.effects):
            raise InvalidOperatorError("One square root per effect is required")
        for root, effect in zip(self.sqrt_effects, self.pom.effects):
            if np.max(np.abs(root @ root - effect.matrix)) > 1e-10:
                raise InvalidOperatorError("Cached square root does not reproduce its effect")
        return self

    @classmethod
    def from_pom(cls, pom: DiscretePOM) -> "LudersInstrument":
        roots = tuple(as_complex_matrix(operator_sqrt(effect.matrix)) for effect in pom.effects)
        return cls(pom=pom, sqrt_effects=roots)

    def root(self, outcome: Hashable) -> np.ndarray:
        return self.sqrt_effects[self.pom.outcomes.index(outcome)]


class SequentialScheme(BaseModel):
    """Unsharp Lüders measurement with effects ½(I ± λ n·σ), then a sharp measurement along m."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    first: LudersInstrument
    second: DiscretePOM
    sharpness: float
    first_axis: np.ndarray
    second_axis: np.ndarray

    @model_validator(mode="after")
    def _valid(self) -> "SequentialScheme":
        if not 0.0 <= self.sharpness <= 1.0:
            raise InvalidOperatorError(f"Sharpness λ = {self.sharpness} outside [0, 1]")
        if not self.second.is_projective():
            raise InvalidOperatorError("The second measurement must be sharp")
        return self

    @classmethod
    def build(cls, n: Sequence[float], m: Sequence[float], sharpness: float) -> "SequentialScheme":
        if not 0.0 <= sharpness <= 1.0:
            raise InvalidOperatorError(f"Sharpness λ = {sharpness} outside [0, 1]")
        n, m = unit_vector(n), unit_vector(m)
        first = DiscretePOM(
            outcomes=("+", "-"),
            effects=(
                Effect(matrix=bloch_matrix(0.5, 0.5 * sharpness * n)),
                Effect(matrix=bloch_matrix(0.5, -0.5 * sharpness * n)),
            ),
        )
        return cls(
            first=LudersInstrument.from_pom(first),
            second=sharp_binary_pom(m),
            sharpness=sharpness,
            first_axis=n,
            second_axis=m,
        )


class TradeoffRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    sharpness: float
    first_acc: float
    second_acc: float
    jm_sum: float


# --- Operations ---
def effective_joint_pom(s: SequentialScheme) -> DiscretePOM:
    """G(i, j) = √Aᵢ Bⱼ √Aᵢ on the 2×2 grid."""
    effects = []
    for i, j in GRID_OUTCOMES:
        root = s.first.root(i)
        effects.append(Effect(matrix=root @ s.second.effect(j).matrix @ root))
    return DiscretePOM(outcomes=GRID_OUTCOMES, effects=tuple(effects))


def distorted_second_observable(s: SequentialScheme) -> DiscretePOM:
    """Heisenberg-picture second observable G2(j) = Σᵢ √Aᵢ Bⱼ √Aᵢ."""
    return margins_of_joint(effective_joint_pom(s))[1]


def luders_update(
    instrument: LudersInstrument, rho: DensityOperator, outcome: Hashable
) -> Tuple[float, Optional[DensityOperator]]:
    """Probability of the outcome and the normalized post-measurement state (None if the outcome is impossible)."""
    root = instrument.root(outcome)
    unnormalized = root @ rho.matrix @ root
    probability = float(np.trace(unnormalized).real)
    if probability <= 1e-15:
        return probability, None
    post = unnormalized / probability
    return probability, DensityOperator(matrix=0.5 * (post + post.conj().T))


def simulate_sequence(s: SequentialScheme, rho: DensityOperator) -> np.ndarray:
    """Two-step simulation: probs[i, j] = p(i) · tr[ρᵢ Bⱼ] with ρᵢ the Lüders post-state."""
    probs = np.zeros((2, 2))
    for row, i in enumerate(s.first.pom.outcomes):
        p_first, post = luders_update(s.first, rho, i)
        if post is None:
            continue
        for col, j in enumerate(s.second.outcomes):
            probs[row, col] = p_first * born_probability(post, s.second.effect(j))
    return probs


def tradeoff_row(n: Sequence[float], m: Sequence[float], sharpness: float) -> TradeoffRow:
    """Bloch lengths of both margins of the sequential scheme and their sum-form value."""
    first, second = margins_of_joint(effective_joint_pom(SequentialScheme.build(n, m, sharpness)))
    a = matrix_to_qubit_effect(first.effect("+")).a
    b = matrix_to_qubit_effect(second.effect("+")).a
    _, jm_sum = jm_unbiased_sum_form(a, b)
    return TradeoffRow(
        sharpness=sharpness,
        first_acc=float(np.linalg.norm(a)),
        second_acc=float(np.linalg.norm(b)),
        jm_sum=jm_sum,
    )


def check_orthogonal_axes(n: Sequence[float], m: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    n, m = unit_vector(n), unit_vector(m)
    if abs(float(n @ m)) > ORTHOGONALITY_TOL:
        raise InvalidOperatorError(f"Axes must be orthogonal, n·m = {float(n @ m):.3e}")
    return n, m


def disturbance_tradeoff_scan(n: Sequence[float], m: Sequence[float], lambdas: Sequence[float]) -> List[TradeoffRow]:
    """One trade-off row per λ; every row saturates |a + b| + |a − b| = 1."""
    n, m = check_orthogonal_axes(n, m)
    if len(lambdas) == 0:
        raise InvalidOperatorError("At least one λ value is required")
    rows = [tradeoff_row(n, m, float(lam)) for lam in lambdas]
    logging.info(f"Trade-off scan over {len(rows)} sharpness values")
    return rows
