"""Bit-exact field dump/restore: raw little-endian samples plus a JSON sidecar."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from src.fields.grid import Grid
from src.fields.models import FIELD_TYPES, Field
from src.spectral.domain import Domain

logger = logging.getLogger(__name__)

_DTYPES = {"float64": "<f8", "complex128": "<c16"}


def dump_field(field: Field, path: Path) -> tuple[Path, Path]:
    """Write ``<path>.bin`` and ``<path>.json``; returns both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dtype_name = "complex128" if np.iscomplexobj(field.samples) else "float64"
    data_path = path.with_suffix(".bin")
    meta_path = path.with_suffix(".json")
    data_path.write_bytes(np.ascontiguousarray(field.samples, dtype=_DTYPES[dtype_name]).tobytes())
    metadata = {
        "kind": field.kind,
        "dtype": dtype_name,
        "shape": list(field.samples.shape),
        "domain": field.grid.domain.model_dump(mode="json"),
        "nx": field.grid.nx,
        "ny": field.grid.ny,
    }
    with meta_path.open("w", encoding="utf-8") as handle:
        json.dump(metadata, handle, indent=2, sort_keys=True)
    logger.debug("Stored %s field at %s", field.kind, data_path)
    return data_path, meta_path


def load_field(path: Path) -> Field:
    """Restore a field written by ``dump_field``."""
    path = Path(path)
    meta_path = path.with_suffix(".json")
    data_path = path.with_suffix(".bin")
    if not meta_path.exists() or not data_path.exists():
        raise FileNotFoundError(f"Missing field files for {path}")
    with meta_path.open("r", encoding="utf-8") as handle:
        metadata = json.load(handle)
    try:
        field_type = FIELD_TYPES[metadata["kind"]]
    except KeyError as exc:
        raise ValueError(f"Unknown field kind in {meta_path}: {metadata.get('kind')}") from exc
    grid = Grid(Domain.model_validate(metadata["domain"]), metadata["nx"], metadata["ny"])
    samples = np.frombuffer(data_path.read_bytes(), dtype=_DTYPES[metadata["dtype"]]).reshape(metadata["shape"])
    return field_type(grid, samples)
