"""
Mesh and report files.

    .off   ASCII OFF triangle meshes (n = 3)
    .json  curve files {"dimension": 2, "vertices": [...], "loops": [...]} (n = 2)

Normals are never stored; they are recomputed from the winding on load.
"""

import csv
import json
import logging
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from src.energy import EnergyReport
from src.geometry import SurfaceMesh, build_surface

logger = logging.getLogger(__name__)

OFF_HEADER = "OFF"
CURVE_EXTENSIONS = (".json",)
OFF_EXTENSIONS = (".off",)


class MeshIOError(Exception):
    """Base exception for mesh and report file errors"""

    pass


class OffFormatError(MeshIOError):
    """Raised for malformed OFF files; messages carry the line number"""

    pass


class CurveFormatError(MeshIOError):
    """Raised for malformed curve files or curves that cannot be written as loops"""

    pass


class DimensionMismatchError(MeshIOError):
    """Raised when a mesh is written to a format of another dimension"""

    pass


def _off_lines(text: str) -> List[Tuple[int, List[str]]]:
    """Non-empty lines with comments stripped, paired with 1-based line numbers"""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((number, content.split()))
    return lines


def _parse_ints(tokens: List[str], line: int, what: str) -> List[int]:
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise OffFormatError(f"Line {line}: expected integers in {what}, got {' '.join(tokens)!r}")


def load_off(path: Union[str, Path]) -> SurfaceMesh:
    """
    Read an ASCII OFF file with triangular faces.

    Raises:
        OffFormatError: bad header or counts, short vertex lines, non-triangle
            faces, out-of-range indices (all with line numbers)
        MeshIOError: file cannot be read
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MeshIOError(f"Cannot read {path}: {e}")

    lines = _off_lines(text)
    if not lines or not lines[0][1][0].startswith(OFF_HEADER):
        raise OffFormatError(f"Line {lines[0][0] if lines else 1}: missing '{OFF_HEADER}' header")

    number, tokens = lines[0]
    # counts may share the header line ("OFF 8 12 0")
    if tokens[0] == OFF_HEADER and len(tokens) > 1:
        counts_line, counts = number, tokens[1:]
        body = lines[1:]
    else:
        if len(lines) < 2:
            raise OffFormatError(f"Line {number}: missing vertex/face counts")
        counts_line, counts = lines[1]
        body = lines[2:]

    counts = _parse_ints(counts, counts_line, "counts")
    if len(counts) < 2 or min(counts[:2]) < 0:
        raise OffFormatError(f"Line {counts_line}: expected 'V F E' counts")
    vertex_count, face_count = counts[0], counts[1]
    if len(body) < vertex_count + face_count:
        raise OffFormatError(
            f"Line {counts_line}: header announces {vertex_count} vertices and {face_count} faces, "
            f"file has {len(body)} data lines"
        )

    vertices = []
    for number, tokens in body[:vertex_count]:
        if len(tokens) < 3:
            raise OffFormatError(f"Line {number}: vertex needs 3 coordinates, got {len(tokens)}")
        try:
            vertices.append([float(token) for token in tokens[:3]])
        except ValueError:
            raise OffFormatError(f"Line {number}: invalid vertex coordinates {' '.join(tokens)!r}")

    faces = []
    for face_index, (number, tokens) in enumerate(body[vertex_count : vertex_count + face_count]):
        values = _parse_ints(tokens, number, f"face {face_index}")
        if values[0] != 3 or len(values) < 4:
            raise OffFormatError(
                f"Line {number}: face {face_index} has {values[0]} vertices; only triangles are supported"
            )
        face = values[1:4]
        if any(not 0 <= index < vertex_count for index in face):
            raise OffFormatError(
                f"Line {number}: face {face_index} references a vertex outside 0..{vertex_count - 1}"
            )
        faces.append(face)

    mesh = build_surface(3, np.array(vertices).reshape(-1, 3), np.array(faces).reshape(-1, 3))
    logger.debug(f"Loaded {path}: {mesh.vertex_count} vertices, {mesh.element_count} faces")
    return mesh


def save_off(mesh: SurfaceMesh, path: Union[str, Path]) -> None:
    if mesh.dimension != 3:
        raise DimensionMismatchError(f"OFF stores triangle meshes in 3D, got a {mesh.dimension}D mesh")

    lines = [OFF_HEADER, f"{mesh.vertex_count} {mesh.element_count} 0"]
    lines += [" ".join(f"{c:.17g}" for c in vertex) for vertex in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in face) for face in mesh.elements]
    _write_text(path, "\n".join(lines) + "\n")


def _chain_loops(elements: np.ndarray) -> List[List[int]]:
    """Recover vertex cycles from directed segments; open chains are rejected"""
    successor: Dict[int, int] = {}
    for start, end in elements.tolist():
        if start in successor:
            raise CurveFormatError(f"Vertex {start} starts more than one segment")
        successor[start] = end

    loops = []
    visited = set()
    for start, _ in elements.tolist():
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        current = successor[start]
        while current != start:
            if current not in successor:
                raise CurveFormatError(f"Curve is open at vertex {current}")
            loop.append(current)
            visited.add(current)
            current = successor[current]
        loops.append(loop)
    return loops


def load_curve(path: Union[str, Path]) -> SurfaceMesh:
    """
    Read a curve file. Each loop [i0, i1, ..., ik] contributes the segments
    (i0, i1), ..., (ik, i0).
    """
    try:
        with open(Path(path), "r") as file:
            data = json.load(file)
    except OSError as e:
        raise MeshIOError(f"Cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise CurveFormatError(f"Invalid JSON in {path}: {e}")

    if not isinstance(data, dict):
        raise CurveFormatError(f"{path} must contain a JSON object")
    missing = [name for name in ("dimension", "vertices", "loops") if name not in data]
    if missing:
        raise CurveFormatError(f"Missing required fields: {', '.join(missing)}")
    if data["dimension"] != 2:
        raise DimensionMismatchError(f"Curve files are 2D, got dimension {data['dimension']}")

    vertices = np.asarray(data["vertices"], dtype=float).reshape(-1, 2)
    segments = []
    for loop_index, loop in enumerate(data["loops"]):
        if len(loop) < 3:
            raise CurveFormatError(f"Loop {loop_index} has {len(loop)} vertices; at least 3 are required")
        if any(not 0 <= int(i) < len(vertices) for i in loop):
            raise CurveFormatError(f"Loop {loop_index} references a vertex outside 0..{len(vertices) - 1}")
        segments += [[int(loop[k]), int(loop[(k + 1) % len(loop)])] for k in range(len(loop))]

    return build_surface(2, vertices, np.array(segments, dtype=np.int64).reshape(-1, 2))


def save_curve(mesh: SurfaceMesh, path: Union[str, Path]) -> None:
    if mesh.dimension != 2:
        raise DimensionMismatchError(f"Curve files store 2D meshes, got a {mesh.dimension}D mesh")

    data = {
        "dimension": 2,
        "vertices": mesh.vertices.tolist(),
        "loops": _chain_loops(mesh.elements),
    }
    _write_text(path, json.dumps(data, indent=2) + "\n")


def load_mesh(path: Union[str, Path]) -> SurfaceMesh:
    suffix = Path(path).suffix.lower()
    if suffix in OFF_EXTENSIONS:
        return load_off(path)
    if suffix in CURVE_EXTENSIONS:
        return load_curve(path)
    raise MeshIOError(f"Unknown mesh format '{suffix}' for {path}; use .off or .json")


def save_mesh(mesh: SurfaceMesh, path: Union[str, Path]) -> None:
    """Write OFF for 3D meshes and curve JSON for 2D meshes; the extension must agree"""
    suffix = Path(path).suffix.lower()
    expected = OFF_EXTENSIONS if mesh.dimension == 3 else CURVE_EXTENSIONS
    if suffix not in expected:
        raise DimensionMismatchError(
            f"A {mesh.dimension}D mesh is written as {expected[0]}, got '{suffix}'"
        )
    if mesh.dimension == 3:
        save_off(mesh, path)
    else:
        save_curve(mesh, path)


def _write_text(path: Union[str, Path], text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise MeshIOError(f"Cannot write {path}: {e}")
    logger.debug(f"Wrote {path}")


def report_to_dict(report: Any) -> Dict[str, Any]:
    """Field-name keyed dict of a report dataclass, with tuples as lists"""
    if not is_dataclass(report):
        raise TypeError(f"Expected a report dataclass, got {type(report).__name__}")
    return {
        name: list(value) if isinstance(value, tuple) else value
        for name, value in asdict(report).items()
    }


def _csv_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_report(report: Any, path: Union[str, Path], format: str = "json") -> None:
    """
    JSON: one object keyed by field names (floats keep full precision).
    CSV: for an EnergyReport, one (index, value) row per pointwise value;
    for other reports, a header row of field names and one row of values.
    """
    data = report_to_dict(report)
    if format == "json":
        _write_text(path, json.dumps(data, indent=2) + "\n")
        return
    if format != "csv":
        raise MeshIOError(f"Unknown report format '{format}'; use json or csv")

    try:
        with open(Path(path), "w", newline="") as file:
            writer = csv.writer(file)
            if isinstance(report, EnergyReport):
                writer.writerow(["index", "value"])
                for index, value in enumerate(report.pointwise_values):
                    writer.writerow([index, _csv_cell(value)])
            else:
                writer.writerow(list(data))
                writer.writerow([_csv_cell(value) for value in data.values()])
    except OSError as e:
        raise MeshIOError(f"Cannot write {path}: {e}")
    logger.debug(f"Wrote {format} report to {path}")
