import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type

import numpy as np

from src.geometry import SurfaceMesh, build_surface, transform_mesh
from src.shapes import BaseShape, ShapeSpecError, UnknownShapeError, shape_registry

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ["kind", "resolution"]

ORTHOGONALITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ShapeSpec:
    """Parametric description of a generated test shape"""

    kind: str
    resolution: int
    parameters: Dict[str, Any] = field(default_factory=dict)
    center: Optional[Sequence[float]] = None
    rotation: Optional[Sequence[Sequence[float]]] = None


def _shape_class(kind: str) -> Type[BaseShape]:
    try:
        return shape_registry[kind]
    except KeyError:
        raise UnknownShapeError(
            f"Unknown shape kind '{kind}'. Available kinds: {', '.join(sorted(shape_registry))}"
        )


def list_shapes() -> Dict[str, BaseShape]:
    """All registered shape generators, keyed by kind"""
    return {kind: cls() for kind, cls in sorted(shape_registry.items())}


def _placement(spec: ShapeSpec, dimension: int):
    rotation = np.eye(dimension)
    if spec.rotation is not None:
        rotation = np.asarray(spec.rotation, dtype=float)
        if rotation.shape != (dimension, dimension):
            raise ShapeSpecError(
                f"Rotation for {spec.kind} must be {dimension}x{dimension}, got {rotation.shape}"
            )
        if not np.allclose(rotation.T @ rotation, np.eye(dimension), atol=ORTHOGONALITY_TOLERANCE):
            raise ShapeSpecError("Rotation matrix is not orthogonal")

    center = np.zeros(dimension)
    if spec.center is not None:
        center = np.asarray(spec.center, dtype=float)
        if center.shape != (dimension,):
            raise ShapeSpecError(
                f"Center for {spec.kind} must have {dimension} coordinates, got {center.shape}"
            )
    return rotation, center


def generate_shape(spec: ShapeSpec) -> SurfaceMesh:
    """
    Build a closed (except 'hemisphere'), consistently oriented mesh with
    outward normals from a ShapeSpec.

    Raises:
        UnknownShapeError: no generator registered under spec.kind
        ShapeSpecError: invalid parameters, resolution, center or rotation
    """
    shape = _shape_class(spec.kind)()
    params, errors = shape.validate_params(dict(spec.parameters))
    if not errors:
        errors = shape.validate_resolution(spec.resolution, params)
    if errors:
        raise ShapeSpecError(f"Invalid {spec.kind} specification: {', '.join(errors)}")

    rotation, center = _placement(spec, shape.dimension)
    vertices, elements = shape.build(params, int(spec.resolution))
    mesh = build_surface(shape.dimension, vertices, elements)
    if spec.rotation is not None or spec.center is not None:
        mesh = transform_mesh(mesh, rotation, center)

    logger.debug(f"Generated {spec.kind} with {mesh.element_count} elements")
    return mesh


def load_shape_spec(path: str) -> ShapeSpec:
    """Read a JSON shape preset such as shapes/star.json"""
    try:
        with open(Path(path), "r") as file:
            spec_dict = json.load(file)

        missing_fields = [name for name in REQUIRED_FIELDS if name not in spec_dict]
        if missing_fields:
            raise ShapeSpecError(f"Missing required fields: {', '.join(missing_fields)}")

        return ShapeSpec(
            kind=spec_dict["kind"],
            resolution=spec_dict["resolution"],
            parameters=spec_dict.get("parameters", {}),
            center=spec_dict.get("center"),
            rotation=spec_dict.get("rotation"),
        )
    except json.JSONDecodeError as e:
        logger.error(f"Shape preset {path} contains invalid JSON")
        raise ShapeSpecError(f"Invalid JSON in {path}: {e}")


def describe_parameters(kind: str) -> List[str]:
    """Human-readable parameter lines for CLI help"""
    shape = _shape_class(kind)()
    lines = []
    for param in shape.parameters:
        req = "required" if param.required else f"default {param.default}"
        lines.append(f"{param.name} ({param.type.__name__}, {req}): {param.description}")
    return lines
