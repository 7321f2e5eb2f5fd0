# ===================================================================================
# Project: Unsharp
# File: app/measurement/joint.py
# Description: This file decides joint measurability (coexistence) of two binary qubit observables, both by the
#              closed-form coexistence inequality and by a constructive feasibility oracle that searches for a
#              joint observable on the 2×2 outcome grid. Unsharpness and bias measures live here too.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
from typing import Any, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.optimize import minimize

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from config import settings
from app.core.exceptions import InvalidOperatorError, OracleConvergenceError
from app.core.operators import (
    DiscretePOM,
    Effect,
    QubitEffect,
    as_vector3,
    bloch_matrix,
    commutator_norm,
    qubit_effect_to_matrix,
    validate_stochastic,
)

Verdict = Literal["JointlyMeasurable", "NotJointlyMeasurable", "Boundary"]

GRID_OUTCOMES = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))


class JMReport(BaseModel):
    """Verdict of the coexistence inequality with every intermediate quantity."""

    model_config = ConfigDict(frozen=True)

    phiA: float
    phiB: float
    betaA: float
    betaB: float
    F: float
    B: float
    x: float
    y: float
    dot_ab: float
    margin: float
    verdict: Verdict

    @property
    def is_jointly_measurable(self) -> bool:
        # The inequality is non-strict, so the boundary belongs to the coexistent region.
        return self.verdict != settings.VERDICT_NOT_JOINTLY_MEASURABLE


class JointObservableCandidate(BaseModel):
    """Free effect G₊₊ = g0·I + g·σ of a 2×2-grid joint observable for the pair (A, B).

    The other three cells are fixed by the margins: G₊₋ = A − G₊₊, G₋₊ = B − G₊₊, G₋₋ = I − A − B + G₊₊.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g0: float
    g: np.ndarray
    qa: QubitEffect
    qb: QubitEffect
    max_violation: float
    objective: float

    @field_validator("g", mode="before")
    @classmethod
    def _vector(cls, value: Any) -> np.ndarray:
        return as_vector3(value)

    def cells(self) -> Tuple[Tuple[float, np.ndarray], ...]:
        """Bloch data (c0, c) of G₊₊, G₊₋, G₋₊, G₋₋ in grid order."""
        return _cells(self.g0, self.g, self.qa, self.qb)

    def to_pom(self) -> DiscretePOM:
        effects = tuple(Effect(matrix=bloch_matrix(c0, c)) for c0, c in self.cells())
        return DiscretePOM(outcomes=GRID_OUTCOMES, effects=effects)


# --- Helper Functions ---
def _radicands(q: QubitEffect) -> Tuple[float, float]:
    norm2 = float(q.a @ q.a)
    r1 = q.a0 ** 2 - norm2
    r2 = (1.0 - q.a0) ** 2 - norm2
    if min(r1, r2) < -settings.TOLERANCE:
        raise InvalidOperatorError(f"Negative radicand {min(r1, r2):.3e}: not a valid effect")
    return np.sqrt(max(r1, 0.0)), np.sqrt(max(r2, 0.0))


def _cells(g0: float, g: np.ndarray, qa: QubitEffect, qb: QubitEffect):
    return (
        (g0, g),
        (qa.a0 - g0, qa.a - g),
        (qb.a0 - g0, qb.a - g),
        (1.0 - qa.a0 - qb.a0 + g0, g - qa.a - qb.a),
    )


def _verdict(margin: float, band: float) -> Verdict:
    if margin >= band:
        return settings.VERDICT_JOINTLY_MEASURABLE
    if margin <= -band:
        return settings.VERDICT_NOT_JOINTLY_MEASURABLE
    return settings.VERDICT_BOUNDARY


def _unbiased_vectors(a: Sequence[float], b: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    a, b = as_vector3(a), as_vector3(b)
    for name, v in (("a", a), ("b", b)):
        if np.linalg.norm(v) > 0.5 + settings.TOLERANCE:
            raise InvalidOperatorError(f"|{name}| = {np.linalg.norm(v):.12g} exceeds 1/2")
    return a, b


# --- Unsharpness and bias ---
def unsharpness(q: QubitEffect) -> float:
    """φ(A) = √(a0² − |a|²) + √((1 − a0)² − |a|²)"""
    s1, s2 = _radicands(q)
    return float(s1 + s2)


def bias(q: QubitEffect) -> float:
    """β(A) = √(a0² − |a|²) − √((1 − a0)² − |a|²)"""
    s1, s2 = _radicands(q)
    return float(s1 - s2)


def commutes(qa: QubitEffect, qb: QubitEffect, tol: float = 1e-10) -> bool:
    return commutator_norm(qubit_effect_to_matrix(qa), qubit_effect_to_matrix(qb)) < tol


def smear_qubit_effect(q: QubitEffect, confusion: Any) -> QubitEffect:
    """First effect of the binary observable {A, I − A} post-processed by a 2×2 confusion kernel."""
    kernel = validate_stochastic(confusion, 2)
    if kernel.shape != (2, 2):
        raise InvalidOperatorError(f"Expected a 2×2 confusion matrix, got {kernel.shape}")
    keep, flip = kernel[0, 0], kernel[1, 0]
    return QubitEffect(a0=keep * q.a0 + flip * (1.0 - q.a0), a=(keep - flip) * q.a)


# --- Closed-form criteria ---
def jm_closed_form(qa: QubitEffect, qb: QubitEffect, band: Optional[float] = None) -> JMReport:
    """Coexistence inequality ½[F(2 − B) + B(2 − F)] + (xy − 4a·b)² ≥ 1."""
    band = settings.BOUNDARY_BAND if band is None else band
    phi_a, phi_b = unsharpness(qa), unsharpness(qb)
    beta_a, beta_b = bias(qa), bias(qb)
    F = phi_a ** 2 + phi_b ** 2
    B = beta_a ** 2 + beta_b ** 2
    x, y = 2.0 * qa.a0 - 1.0, 2.0 * qb.a0 - 1.0
    dot_ab = float(qa.a @ qb.a)
    margin = 0.5 * (F * (2.0 - B) + B * (2.0 - F)) + (x * y - 4.0 * dot_ab) ** 2 - 1.0
    return JMReport(
        phiA=phi_a,
        phiB=phi_b,
        betaA=beta_a,
        betaB=beta_b,
        F=F,
        B=B,
        x=x,
        y=y,
        dot_ab=dot_ab,
        margin=margin,
        verdict=_verdict(margin, band),
    )


def jm_unbiased_vector_form(a: Sequence[float], b: Sequence[float]) -> Tuple[bool, float]:
    """16|a×b|² ≤ (1 − 4|a|²)(1 − 4|b|²); returns (holds, RHS − LHS)."""
    a, b = _unbiased_vectors(a, b)
    cross = np.cross(a, b)
    lhs = 16.0 * float(cross @ cross)
    rhs = (1.0 - 4.0 * float(a @ a)) * (1.0 - 4.0 * float(b @ b))
    margin = rhs - lhs
    return margin >= 0.0, margin


def jm_unbiased_sum_form(a: Sequence[float], b: Sequence[float]) -> Tuple[bool, float]:
    """|a + b| + |a − b| ≤ 1; returns (holds, |a + b| + |a − b|)."""
    a, b = _unbiased_vectors(a, b)
    value = float(np.linalg.norm(a + b) + np.linalg.norm(a - b))
    return value <= 1.0, value


# --- Feasibility oracle ---
def _profile(g: np.ndarray, qa: QubitEffect, qb: QubitEffect) -> Tuple[np.ndarray, np.ndarray]:
    """Split the four positivity defects |c| − c0 by the sign of their g0 dependence.

    Defects falling with g0 give L, defects rising with g0 give U, so that
    max over cells = max(L − g0, U + g0).
    """
    shift = 1.0 - qa.a0 - qb.a0
    lower = np.maximum(
        np.linalg.norm(g, axis=-1),
        np.linalg.norm(g - qa.a - qb.a, axis=-1) - shift,
    )
    upper = np.maximum(
        np.linalg.norm(qa.a - g, axis=-1) - qa.a0,
        np.linalg.norm(qb.a - g, axis=-1) - qb.a0,
    )
    return lower, upper


def _objective(g: np.ndarray, qa: QubitEffect, qb: QubitEffect) -> np.ndarray:
    # min over g0 of max(L − g0, U + g0) is attained at g0 = (L − U)/2
    lower, upper = _profile(g, qa, qb)
    return 0.5 * (lower + upper)


def _best_g0(g: np.ndarray, qa: QubitEffect, qb: QubitEffect) -> float:
    lower, upper = _profile(g, qa, qb)
    return float(0.5 * (lower - upper))


def max_violation(g0: float, g: np.ndarray, qa: QubitEffect, qb: QubitEffect) -> float:
    """Largest positivity defect (|c| − c0)₊ over the four cells."""
    return max(max(float(np.linalg.norm(c)) - c0, 0.0) for c0, c in _cells(g0, np.asarray(g), qa, qb))


def _grid_search(qa: QubitEffect, qb: QubitEffect, points: int) -> Tuple[np.ndarray, float, float]:
    axis = np.linspace(-0.5, 0.5, points)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    values = _objective(grid, qa, qb)
    best = int(np.argmin(values))
    return grid[best], float(values[best]), float(axis[1] - axis[0])


def _epigraph_polish(g: np.ndarray, qa: QubitEffect, qb: QubitEffect) -> Tuple[np.ndarray, bool]:
    """Minimize t subject to |c| − c0 ≤ t on every cell, over (g0, g, t), starting from g."""

    def slack(x: np.ndarray) -> np.ndarray:
        return np.array([x[4] - (np.sqrt(c @ c + 1e-30) - c0) for c0, c in _cells(x[0], x[1:4], qa, qb)])

    start = np.concatenate([[_best_g0(g, qa, qb)], g, [float(_objective(g, qa, qb))]])
    result = minimize(
        lambda x: x[4],
        start,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": slack}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    return np.array(result.x[1:4]), bool(result.success)


def jm_oracle(
    qa: QubitEffect,
    qb: QubitEffect,
    tol: Optional[float] = None,
    grid_points: Optional[int] = None,
) -> Tuple[Verdict, JointObservableCandidate]:
    """Search for a joint observable with margins A and B on the 2×2 grid.

    The objective max over cells of (|c| − c0) is convex in (g0, g). g0 is eliminated exactly,
    a coarse grid over g ∈ [−½, ½]³ seeds Nelder–Mead refinement and an SLSQP epigraph solve polishes
    the result. The verdict is JointlyMeasurable when the minimum is ≤ tol, NotJointlyMeasurable when it exceeds 10·tol.
    """
    tol = settings.ORACLE_TOL if tol is None else tol
    points = grid_points or settings.ORACLE_GRID_POINTS

    best_g, best_value, spacing = _grid_search(qa, qb, points)
    converged = True

    # A strictly feasible grid point is already a witness
    if best_value > -tol:
        step = spacing
        for _ in range(settings.ORACLE_MAX_RESTARTS):
            simplex = np.vstack([best_g, best_g + step * np.eye(3)])
            result = minimize(
                lambda g: float(_objective(g, qa, qb)),
                best_g,
                method="Nelder-Mead",
                options={"initial_simplex": simplex, "xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000},
            )
            converged = bool(result.success)
            improvement = best_value - float(result.fun)
            if float(result.fun) < best_value:
                best_g, best_value = np.array(result.x), float(result.fun)
            if best_value <= -tol or improvement < 1e-15:
                break
            step *= 0.1

        polished_g, polished = _epigraph_polish(best_g, qa, qb)
        polished_value = float(_objective(polished_g, qa, qb))
        if polished_value < best_value:
            best_g, best_value = polished_g, polished_value
            converged = converged or polished

    g0 = _best_g0(best_g, qa, qb)
    candidate = JointObservableCandidate(
        g0=g0,
        g=best_g,
        qa=qa,
        qb=qb,
        max_violation=max_violation(g0, best_g, qa, qb),
        objective=best_value,
    )

    if best_value <= tol:
        verdict = settings.VERDICT_JOINTLY_MEASURABLE
    elif best_value > 10.0 * tol:
        verdict = settings.VERDICT_NOT_JOINTLY_MEASURABLE
    elif converged:
        verdict = settings.VERDICT_BOUNDARY
    else:
        logging.error(f"Oracle did not converge: objective {best_value:.3e} within ({tol:.1e}, {10 * tol:.1e}]")
        raise OracleConvergenceError(
            f"Nelder-Mead did not converge and the objective {best_value:.3e} is inconclusive"
        )

    logging.info(f"Oracle verdict {verdict} (objective {best_value:.3e}, max violation {candidate.max_violation:.3e})")
    return verdict, candidate


def verdicts_agree(closed: Verdict, oracle: Verdict) -> bool:
    """A Boundary verdict on either side is inconclusive and agrees with anything."""
    if settings.VERDICT_BOUNDARY in (closed, oracle):
        return True
    return closed == oracle


# --- Margins ---
def margins_of_joint(g: DiscretePOM) -> Tuple[DiscretePOM, DiscretePOM]:
    """First and second margins of a POM on the grid {+,−}×{+,−}."""
    if set(g.outcomes) != set(GRID_OUTCOMES):
        raise InvalidOperatorError(f"Joint POM must have outcomes {GRID_OUTCOMES}, got {g.outcomes}")
    cell = {outcome: g.effect(outcome).matrix for outcome in GRID_OUTCOMES}
    first = DiscretePOM(
        outcomes=("+", "-"),
        effects=(
            Effect(matrix=cell[("+", "+")] + cell[("+", "-")]),
            Effect(matrix=cell[("-", "+")] + cell[("-", "-")]),
        ),
    )
    second = DiscretePOM(
        outcomes=("+", "-"),
        effects=(
            Effect(matrix=cell[("+", "+")] + cell[("-", "+")]),
            Effect(matrix=cell[("+", "-")] + cell[("-", "-")]),
        ),
    )
    return first, second
