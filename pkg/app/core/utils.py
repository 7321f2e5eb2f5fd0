# ===================================================================================
# Project: Unsharp
# File: app/core/utils.py
# Description: This file contains utility functions for the JSON operator format, number formatting
#              and CSV emission used by the graphs and the CLI.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import csv
import io
import json
import os
import sys
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from config import settings
from app.core.exceptions import InvalidOperatorError
from app.core.operators import QubitEffect
from app.measurement.classical import ClassicalState
from app.measurement.sphere import SphereRegion


def matrix_to_json(matrix: np.ndarray) -> List[List[List[float]]]:
    """Serialize a complex matrix as rows of [re, im] pairs."""
    return [[[float(np.real(cell)), float(np.imag(cell))] for cell in row] for row in matrix]


def matrix_from_json(rows: Any) -> np.ndarray:
    """Parse rows of [re, im] pairs (plain real numbers are accepted too)."""
    if not isinstance(rows, list) or not rows or not all(isinstance(row, list) for row in rows):
        raise InvalidOperatorError("Matrix must be a non-empty array of rows")
    parsed = []
    for row in rows:
        parsed_row = []
        for cell in row:
            if isinstance(cell, list):
                if len(cell) != 2:
                    raise InvalidOperatorError(f"Complex entry must be [re, im], got {cell!r}")
                parsed_row.append(complex(float(cell[0]), float(cell[1])))
            else:
                parsed_row.append(complex(float(cell)))
        parsed.append(parsed_row)
    if len({len(row) for row in parsed}) != 1:
        raise InvalidOperatorError("Matrix rows have different lengths")
    return np.array(parsed, dtype=complex)


def qubit_effect_from_json(obj: Any) -> QubitEffect:
    if not isinstance(obj, dict) or "a0" not in obj or "a" not in obj:
        raise InvalidOperatorError(f'Qubit effect must look like {{"a0": number, "a": [x, y, z]}}, got {obj!r}')
    return QubitEffect(a0=float(obj["a0"]), a=obj["a"])


def qubit_effect_to_json(q: QubitEffect) -> dict:
    return {"a0": float(q.a0), "a": [float(x) for x in q.a]}


def classical_state_from_json(obj: Any) -> ClassicalState:
    """{"atoms": [{"bloch": [x, y, z], "w": number}, ...]}"""
    if not isinstance(obj, dict) or not isinstance(obj.get("atoms"), list):
        raise InvalidOperatorError('Classical state must look like {"atoms": [{"bloch": [x, y, z], "w": number}]}')
    try:
        blochs = [atom["bloch"] for atom in obj["atoms"]]
        weights = [float(atom["w"]) for atom in obj["atoms"]]
    except (KeyError, TypeError) as e:
        raise InvalidOperatorError(f"Malformed atom: {e}") from e
    return ClassicalState.from_arrays(blochs, weights)


def region_from_json(obj: Any) -> SphereRegion:
    """{"cap": {"axis": [x, y, z], "half_angle_deg": d}} or {"hemisphere": {"axis": [x, y, z]}}"""
    if isinstance(obj, dict) and isinstance(obj.get("cap"), dict):
        cap = obj["cap"]
        if "axis" not in cap or "half_angle_deg" not in cap:
            raise InvalidOperatorError("Cap region needs 'axis' and 'half_angle_deg'")
        return SphereRegion.cap(cap["axis"], np.deg2rad(float(cap["half_angle_deg"])))
    if isinstance(obj, dict) and isinstance(obj.get("hemisphere"), dict) and "axis" in obj["hemisphere"]:
        return SphereRegion.hemisphere(obj["hemisphere"]["axis"])
    raise InvalidOperatorError(f"Unknown region description: {obj!r}")


def format_number(value: float, digits: Optional[int] = None) -> str:
    """Render a float with a fixed number of significant digits ('.' decimal separator)."""
    digits = digits or settings.OUTPUT_DIGITS
    value = float(value)
    if abs(value) < settings.OUTPUT_ZERO:
        value = 0.0
    text = format(value, f".{digits}g")
    return "0" if text == "-0" else text


def round_floats(obj: Any, digits: Optional[int] = None) -> Any:
    """Recursively round floats in a JSON-ready structure to significant digits."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format_number(obj, digits))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {key: round_floats(value, digits) for key, value in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [round_floats(value, digits) for value in obj]
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(round_floats(obj), indent=2) + "\n"


def dump_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(cell) if isinstance(cell, (float, np.floating)) else cell for cell in row])
    return buffer.getvalue()


def load_json_input(source: str) -> Any:
    """Load JSON from a file path, from stdin when source is '-', or inline when it starts with '{' or '['."""
    if source == "-":
        return json.load(sys.stdin)
    if source.lstrip().startswith(("{", "[")):
        return json.loads(source)
    with open(source, "r", encoding="utf-8") as f:
        return json.load(f)
