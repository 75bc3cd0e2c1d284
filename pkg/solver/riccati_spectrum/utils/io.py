# solver/riccati_spectrum/utils/io.py

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
import orjson
from pydantic import BaseModel

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2


def _plain(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(by_alias=True)
    return obj


def _default(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(by_alias=True)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Type is not JSON serializable: {type(obj).__name__}")


def to_json_bytes(obj: Any) -> bytes:
    """Sorted-key JSON; numpy arrays and pydantic records serialize directly."""
    return orjson.dumps(_plain(obj), default=_default, option=JSON_OPTIONS) + b"\n"


def write_json(path: Union[str, Path], obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(to_json_bytes(obj))
    logger.info(f"Wrote {path}")
    return path


def format_cell(value: Any) -> str:
    """17 significant digits for floats; everything else as text."""
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    logger.info(f"Wrote {path}")
    return path


def sidecar_path(path: Union[str, Path], suffix: str) -> Path:
    """``out.csv`` -> ``out.<suffix>``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}")
