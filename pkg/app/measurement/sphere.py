# ===================================================================================
# Project: Unsharp
# File: app/measurement/sphere.py
# Description: This file builds the covariant spin POM on the unit sphere, G(Z) = (1/2π) ∫_Z ½(I + n·σ) dΩ(n),
#              and evaluates it on caps, hemispheres and icosahedral mesh cells (closed form, quadrature and
#              Monte Carlo). Hemisphere marginals give the fuzzy spin observables.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
from functools import lru_cache
from typing import Any, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from config import settings
from app.core.exceptions import InvalidOperatorError
from app.core.operators import (
    PAULI,
    DiscretePOM,
    Effect,
    QubitEffect,
    bloch_matrix,
    sharp_binary_pom,
    smear_binary,
    unit_vector,
)
from app.measurement.joint import GRID_OUTCOMES, JMReport, jm_closed_form

HEMISPHERE_CONFUSION = ((0.75, 0.25), (0.25, 0.75))

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0
ICOSAHEDRON_VERTICES = np.array([
    [-1.0, GOLDEN, 0.0],
    [1.0, GOLDEN, 0.0],
    [-1.0, -GOLDEN, 0.0],
    [1.0, -GOLDEN, 0.0],
    [0.0, -1.0, GOLDEN],
    [0.0, 1.0, GOLDEN],
    [0.0, -1.0, -GOLDEN],
    [0.0, 1.0, -GOLDEN],
    [GOLDEN, 0.0, -1.0],
    [GOLDEN, 0.0, 1.0],
    [-GOLDEN, 0.0, -1.0],
    [-GOLDEN, 0.0, 1.0],
])
ICOSAHEDRON_FACES = (
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (5, 4, 9), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
)


# --- Domain Types ---
class SphereMesh(BaseModel):
    """Spherical triangles with their centers (unit vectors) and exact solid angles."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vertices: np.ndarray
    faces: np.ndarray
    centers: np.ndarray
    solid_angles: np.ndarray

    @model_validator(mode="after")
    def _covers_sphere(self) -> "SphereMesh":
        if np.any(self.solid_angles <= 0):
            raise InvalidOperatorError("Mesh cells must have positive solid angle")
        total = float(np.sum(self.solid_angles))
        if abs(total - 4.0 * np.pi) > 1e-6:
            raise InvalidOperatorError(f"Mesh solid angles sum to {total:.9f}, expected 4π")
        return self

    def __len__(self) -> int:
        return len(self.solid_angles)


class SphereRegion(BaseModel):
    """Cap(axis, half_angle), Hemisphere(axis) or a set of mesh cells."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["cap", "hemisphere", "mesh_cells"]
    axis: Optional[np.ndarray] = None
    half_angle: float = 0.5 * np.pi
    mesh: Optional[SphereMesh] = None
    cells: Tuple[int, ...] = ()

    @field_validator("axis", mode="before")
    @classmethod
    def _normalize(cls, value: Any) -> Optional[np.ndarray]:
        return None if value is None else unit_vector(value)

    @model_validator(mode="after")
    def _consistent(self) -> "SphereRegion":
        if self.kind == "mesh_cells":
            if self.mesh is None:
                raise InvalidOperatorError("Mesh-cell region needs a mesh")
            if any(c < 0 or c >= len(self.mesh) for c in self.cells) or len(set(self.cells)) != len(self.cells):
                raise InvalidOperatorError("Mesh-cell indices must be distinct and in range")
            return self
        if self.axis is None:
            raise InvalidOperatorError(f"A {self.kind} region needs an axis")
        if not 0.0 <= self.half_angle <= np.pi:
            raise InvalidOperatorError(f"Half angle {self.half_angle} outside [0, π]")
        if self.kind == "hemisphere" and self.half_angle != 0.5 * np.pi:
            raise InvalidOperatorError("A hemisphere has half angle π/2")
        return self

    @classmethod
    def cap(cls, axis: Sequence[float], half_angle: float) -> "SphereRegion":
        return cls(kind="cap", axis=axis, half_angle=half_angle)

    @classmethod
    def hemisphere(cls, axis: Sequence[float]) -> "SphereRegion":
        return cls(kind="hemisphere", axis=axis)

    @classmethod
    def full_sphere(cls) -> "SphereRegion":
        return cls(kind="cap", axis=(0.0, 0.0, 1.0), half_angle=np.pi)

    @classmethod
    def mesh_cells(cls, mesh: SphereMesh, cells: Sequence[int]) -> "SphereRegion":
        return cls(kind="mesh_cells", mesh=mesh, cells=tuple(int(c) for c in cells))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership mask for unit vectors (cap and hemisphere regions)."""
        if self.kind == "mesh_cells":
            raise InvalidOperatorError("Point membership is only defined for cap and hemisphere regions")
        return points @ self.axis >= np.cos(self.half_angle)


# --- Mesh construction ---
def _spherical_triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Van Oosterom–Strackee solid angle of spherical triangles (rows of a, b, c)."""
    triple = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    denominator = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(triple, denominator)


def _subdivide(vertices: list, faces: list) -> Tuple[list, list]:
    """Split every triangle into four, pushing edge midpoints to the unit sphere."""
    midpoints = {}

    def midpoint(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in midpoints:
            s = np.asarray(vertices[i]) + np.asarray(vertices[j])
            vertices.append(s / np.linalg.norm(s))
            midpoints[key] = len(vertices) - 1
        return midpoints[key]

    refined = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        refined.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return vertices, refined


@lru_cache(maxsize=8)
def icosahedral_mesh(subdivisions: Optional[int] = None) -> SphereMesh:
    """Icosahedral sphere mesh with 20·4^subdivisions cells (1280 by default)."""
    subdivisions = settings.MESH_SUBDIVISIONS if subdivisions is None else subdivisions
    if subdivisions < 0:
        raise InvalidOperatorError("Number of subdivisions must be nonnegative")
    vertices = [v / np.linalg.norm(v) for v in ICOSAHEDRON_VERTICES]
    faces = list(ICOSAHEDRON_FACES)
    for _ in range(subdivisions):
        vertices, faces = _subdivide(vertices, faces)

    vertices = np.array(vertices)
    faces = np.array(faces, dtype=int)
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    centers = a + b + c
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    solid_angles = _spherical_triangle_area(a, b, c)
    for array in (vertices, faces, centers, solid_angles):
        array.setflags(write=False)
    logging.info(f"Built icosahedral mesh: {len(faces)} cells, total solid angle {solid_angles.sum():.12f}")
    return SphereMesh(vertices=vertices, faces=faces, centers=centers, solid_angles=solid_angles)


def cells_where(mesh: SphereMesh, mask_fn) -> Tuple[int, ...]:
    """Indices of mesh cells whose centers satisfy a vectorized predicate."""
    return tuple(int(i) for i in np.flatnonzero(mask_fn(mesh.centers)))


# --- Operations ---
def covariant_effect(region: SphereRegion) -> Effect:
    """G(Z) for a cap (closed form), a hemisphere (exact) or mesh cells (quadrature)."""
    if region.kind == "hemisphere":
        return Effect(matrix=bloch_matrix(0.5, 0.25 * region.axis))
    if region.kind == "cap":
        # ∫_cap dΩ = 2π(1 − cos θ) and ∫_cap n dΩ = π sin²θ · m
        theta = region.half_angle
        return Effect(matrix=bloch_matrix(0.5 * (1.0 - np.cos(theta)), 0.25 * np.sin(theta) ** 2 * region.axis))
    index = np.array(region.cells, dtype=int)
    weights = region.mesh.solid_angles[index] / (4.0 * np.pi)
    a0 = float(np.sum(weights))
    a = weights @ region.mesh.centers[index] if len(index) else np.zeros(3)
    return Effect(matrix=bloch_matrix(a0, a))


def monte_carlo_effect(
    region: SphereRegion, samples: Optional[int] = None, seed: int = 0
) -> Tuple[Effect, np.ndarray]:
    """Monte Carlo estimate of G(Z) = E[1_Z(n)·(I + n·σ)] over uniform n.

    Returns the estimate and the standard errors of its Bloch data (a0, ax, ay, az).
    """
    samples = samples or settings.MC_SAMPLES
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(samples, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    inside = region.contains(points).astype(float)
    data = np.column_stack([inside, inside[:, None] * points])
    mean = data.mean(axis=0)
    stderr = data.std(axis=0, ddof=1) / np.sqrt(samples)
    logging.info(f"Monte Carlo effect over {samples} samples (seed {seed}): a0={mean[0]:.6f} ± {stderr[0]:.1e}")
    # Clip sampling noise that could push the estimate outside the effect cone
    a0 = float(np.clip(mean[0], 0.0, 1.0))
    a = mean[1:]
    bound = min(a0, 1.0 - a0)
    if np.linalg.norm(a) > bound:
        a = a * bound / np.linalg.norm(a)
    return Effect(matrix=bloch_matrix(a0, a)), stderr


def hemisphere_binary_pom(n0: Sequence[float]) -> DiscretePOM:
    """Simple observable {G(Z(n0)), G(Z(−n0))} = {½(I ± ½n0·σ)}."""
    n0 = unit_vector(n0)
    return DiscretePOM(
        outcomes=("+", "-"),
        effects=(
            covariant_effect(SphereRegion.hemisphere(n0)),
            covariant_effect(SphereRegion.hemisphere(-n0)),
        ),
    )


def verify_smearing(n0: Sequence[float]) -> bool:
    """½(I + ½n0·σ) = ¾P(n0) + ¼P(−n0) to 1e-12."""
    n0 = unit_vector(n0)
    fuzzy = covariant_effect(SphereRegion.hemisphere(n0)).matrix
    smeared = smear_binary(sharp_binary_pom(n0), HEMISPHERE_CONFUSION).effects[0].matrix
    return bool(np.max(np.abs(fuzzy - smeared)) <= 1e-12)


def hemisphere_qubit_effect(n0: Sequence[float]) -> QubitEffect:
    return QubitEffect(a0=0.5, a=0.25 * unit_vector(n0))


def pairwise_hemisphere_jm(n0: Sequence[float], n0p: Sequence[float]) -> JMReport:
    return jm_closed_form(hemisphere_qubit_effect(n0), hemisphere_qubit_effect(n0p))


def hemisphere_joint_pom(n0: Sequence[float], n0p: Sequence[float]) -> DiscretePOM:
    """G coarse-grained onto the four intersections Z(±n0) ∩ Z(±n0p).

    Each intersection of Z(u) and Z(v) is a lune of dihedral angle α = π − ∠(u, v), with
    solid angle 2α and ∫ n dΩ = (π/2)(u + v), hence G(lune) = (α/2π)·I + ⅛(u + v)·σ.
    """
    n0, n0p = unit_vector(n0), unit_vector(n0p)
    effects = []
    for s, t in GRID_OUTCOMES:
        u = n0 if s == "+" else -n0
        v = n0p if t == "+" else -n0p
        angle = np.arctan2(np.linalg.norm(np.cross(u, v)), float(u @ v))
        alpha = np.pi - angle
        effects.append(Effect(matrix=bloch_matrix(alpha / (2.0 * np.pi), 0.125 * (u + v))))
    return DiscretePOM(outcomes=GRID_OUTCOMES, effects=tuple(effects))


# --- Rotations ---
def spin_rotation(rotation: Any) -> np.ndarray:
    """Spin-½ unitary exp(−iθ/2 k·σ) for a 3×3 rotation matrix or scipy Rotation."""
    if not isinstance(rotation, Rotation):
        rotation = Rotation.from_matrix(np.asarray(rotation, dtype=float))
    rotvec = rotation.as_rotvec()
    return expm(-0.5j * np.tensordot(rotvec, PAULI, axes=1))


def rotate_region(region: SphereRegion, rotation: Any) -> SphereRegion:
    if region.kind == "mesh_cells":
        raise InvalidOperatorError("Mesh-cell regions are not rotated; rotate the mesh instead")
    if not isinstance(rotation, Rotation):
        rotation = Rotation.from_matrix(np.asarray(rotation, dtype=float))
    return SphereRegion(kind=region.kind, axis=rotation.apply(region.axis), half_angle=region.half_angle)
