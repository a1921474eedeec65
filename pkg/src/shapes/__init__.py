from src.shapes import curves, solids  # noqa: F401  (populate the registry)
from src.shapes.base_shape import (
    BaseShape,
    ShapeError,
    ShapeParameter,
    ShapeSpecError,
    UnknownShapeError,
    register_shape,
    shape_registry,
)

__all__ = [
    "BaseShape",
    "ShapeError",
    "ShapeParameter",
    "ShapeSpecError",
    "UnknownShapeError",
    "register_shape",
    "shape_registry",
]
