import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Type

import numpy as np

logger = logging.getLogger(__name__)

shape_registry: Dict[str, Type["BaseShape"]] = {}


def register_shape(kind: str):
    def decorator(cls):
        cls.kind = kind
        shape_registry[kind] = cls
        return cls

    return decorator


class ShapeError(Exception):
    """Base exception for shape generation errors"""

    pass


class UnknownShapeError(ShapeError):
    """Raised when a ShapeSpec names a kind nobody registered"""

    pass


class ShapeSpecError(ShapeError, ValueError):
    """Raised when shape parameters or resolution are invalid"""

    pass


@dataclass
class ShapeParameter:
    name: str
    required: bool
    type: type
    description: str
    default: Any = None


class BaseShape(ABC):
    kind: str = ""
    description: str = ""
    dimension: int = 0
    min_resolution: int = 1

    @property
    @abstractmethod
    def parameters(self) -> List[ShapeParameter]:
        """Parameter schema for this kind"""

    def validate_params(self, params: Dict[str, Any]) -> Tuple[Dict[str, Any], List[str]]:
        """
        Convert raw values (numbers or '--param k=v' strings) to the declared
        types and check positivity.

        Returns:
            (converted parameters, list of problems)
        """
        errors = []
        converted = {}
        known = {param.name for param in self.parameters}
        for name in params:
            if name not in known:
                errors.append(f"Unknown parameter for {self.kind}: {name}")

        for param in self.parameters:
            if param.name not in params:
                if param.required:
                    errors.append(f"Missing required parameter: {param.name}")
                else:
                    converted[param.name] = param.default
                continue
            try:
                value = param.type(params[param.name])
            except (TypeError, ValueError):
                errors.append(f"Invalid type for {param.name}. Expected {param.type.__name__}")
                continue
            if param.type is int and float(params[param.name]) != value:
                errors.append(f"Invalid type for {param.name}. Expected int")
                continue
            if not value > 0:
                errors.append(f"Parameter {param.name} must be positive, got {value}")
                continue
            converted[param.name] = value

        if not errors:
            errors.extend(self.check_constraints(converted))
        return converted, errors

    def check_constraints(self, params: Dict[str, Any]) -> List[str]:
        """Kind-specific constraints beyond positivity"""
        return []

    def validate_resolution(self, resolution: int, params: Dict[str, Any]) -> List[str]:
        minimum = self.minimum_resolution(params)
        if int(resolution) != resolution or resolution < minimum:
            return [f"Resolution for {self.kind} must be an integer >= {minimum}, got {resolution}"]
        return []

    def minimum_resolution(self, params: Dict[str, Any]) -> int:
        return self.min_resolution

    @abstractmethod
    def build(self, params: Dict[str, Any], resolution: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Produce outward-oriented geometry centred at the origin.

        Returns:
            (vertices, elements) ready for build_surface
        """
