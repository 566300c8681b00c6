"""
File helpers for simulator inputs and results.

CSV goes through pandas with a fixed float format and JSON is written with
sorted keys, so rerunning a command with the same configuration produces
byte-identical files.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CSV_FLOAT_FORMAT = '%.12g'


def to_builtin(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays (and tuples) into JSON-friendly builtins"""
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def canonical_json(payload: Any) -> str:
    return json.dumps(to_builtin(payload), indent=2, sort_keys=True)


def config_hash(payload: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON encoding of a configuration"""
    encoded = json.dumps(to_builtin(payload), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(encoded.encode('utf-8')).hexdigest()


def ensure_directory(path: PathLike) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_json(path: PathLike, payload: Any) -> Path:
    target = Path(path)
    ensure_directory(target.parent)
    target.write_text(canonical_json(payload) + '\n', encoding='utf-8')
    logger.info(f"Wrote {target}")
    return target


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding='utf-8'))


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    target = Path(path)
    ensure_directory(target.parent)
    frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"Wrote {target} ({len(frame)} rows)")
    return target


def load_matrix_csv(path: PathLike) -> np.ndarray:
    """Read a headerless numeric CSV (one matrix row per line) as float64"""
    frame = pd.read_csv(path, header=None, dtype=np.float64, skip_blank_lines=True, float_precision='round_trip')
    return frame.to_numpy(dtype=np.float64)


def load_vector_csv(path: PathLike) -> np.ndarray:
    return load_matrix_csv(path).reshape(-1)


def write_matrix_csv(matrix: np.ndarray, path: PathLike) -> Path:
    array = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if array.shape[0] == 1 and np.ndim(matrix) == 1:
        array = array.T
    target = Path(path)
    ensure_directory(target.parent)
    pd.DataFrame(array).to_csv(target, header=False, index=False, float_format='%.17g', lineterminator='\n')
    return target
