"""
Structured-text file helpers shared by instance and checkpoint files
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from packaging import version

from .errors import FormatVersionError, InstanceFormatError

FORMAT_VERSION = "1.0"


def is_valid_format_version(version_str: str) -> bool:
    """
    Check if a format version string parses.

    Args:
        version_str: Version string to validate

    Returns:
        True if valid, False otherwise
    """
    try:
        version.parse(version_str)
        return True
    except version.InvalidVersion:
        return False


def check_format_version(version_str: Optional[str]) -> None:
    """
    Refuse files written by an incompatible major format version.

    Files without a version key are accepted as the current version.

    Args:
        version_str: Value of the file's "format_version" key, if any

    Raises:
        FormatVersionError: Version is unparsable or its major component differs
    """
    if version_str is None:
        return
    if not isinstance(version_str, str) or not is_valid_format_version(version_str):
        raise FormatVersionError(f"Invalid format_version {version_str!r}")

    found = version.parse(version_str)
    supported = version.parse(FORMAT_VERSION)
    if found.major != supported.major:
        raise FormatVersionError(
            f"Unsupported format_version {version_str} (this build reads {supported.major}.x)"
        )


def encode_triplets(matrix: np.ndarray) -> List[List[Any]]:
    """Sparse [row, col, value] triplets of the nonzero entries, row-major"""
    rows, cols = np.nonzero(matrix)
    return [[int(i), int(j), float(matrix[i, j])] for i, j in zip(rows, cols)]


def decode_triplets(triplets: Any, shape: tuple, field: str) -> np.ndarray:
    """
    Rebuild a dense matrix from [row, col, value] triplets.

    Missing triplets are zeros; a repeated position is an error.

    Args:
        triplets: Parsed JSON value
        shape: Expected (rows, cols)
        field: Key name used in error messages

    Returns:
        Dense float matrix of the given shape
    """
    if not isinstance(triplets, list):
        raise InstanceFormatError(f"'{field}' must be an array of [row, col, value]", field)

    matrix = np.zeros(shape, dtype=float)
    seen = set()
    for entry in triplets:
        if not isinstance(entry, list) or len(entry) != 3:
            raise InstanceFormatError(f"'{field}' entry {entry!r} is not a triplet", field)
        row, col, value = entry
        if not _is_int(row) or not _is_int(col):
            raise InstanceFormatError(f"'{field}' entry {entry!r} has non-integer index", field)
        if not _is_number(value):
            raise InstanceFormatError(f"'{field}' entry {entry!r} has non-numeric value", field)
        if not (0 <= row < shape[0] and 0 <= col < shape[1]):
            raise InstanceFormatError(
                f"'{field}' entry {entry!r} lies outside a {shape[0]}x{shape[1]} matrix", field
            )
        if (row, col) in seen:
            raise InstanceFormatError(f"'{field}' repeats position ({row}, {col})", field)
        seen.add((row, col))
        matrix[row, col] = float(value)

    return matrix


def decode_vector(values: Any, length: int, field: str) -> np.ndarray:
    if not isinstance(values, list) or not all(_is_number(v) for v in values):
        raise InstanceFormatError(f"'{field}' must be an array of numbers", field)
    if len(values) != length:
        raise InstanceFormatError(f"'{field}' has {len(values)} entries, expected {length}", field)
    return np.array(values, dtype=float).reshape(length)


def require_keys(data: Dict[str, Any], keys: List[str]) -> None:
    for key in keys:
        if key not in data:
            raise InstanceFormatError(f"Missing required key '{key}'", key)


def read_json(path: Path) -> Dict[str, Any]:
    """Read a JSON object; encoding and syntax errors become InstanceFormatError"""
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise InstanceFormatError(f"{path} is not UTF-8 text: {e}") from e
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"Malformed JSON in {path}: {e}") from e
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path} does not contain a JSON object")
    return data


def write_json(data: Dict[str, Any], path: Path) -> None:
    # json writes floats with repr(), which round-trips bit-exactly
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def all_finite(values: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(values)))


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)
