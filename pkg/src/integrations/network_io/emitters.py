"""
emitters.py
-----------
Writes result tables and run metadata.

  - write_table(rows, out_dir, name, fmt)  -> CSV (pandas) or JSON records (orjson)
  - RunOutput                              -> metadata lifecycle for one run:
        started  -> run_metadata.json with status "incomplete"
        finished -> same file rewritten with status "complete" + file list

Tables are written exactly in the row order given; callers sort by a
deterministic key first. Floats use a fixed format so byte-identical inputs
give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import orjson
import pandas as pd

from .provenance import provenance_string

TableFormat = Literal["csv", "json"]
FLOAT_FORMAT = "%.12g"

Rows = Union[pd.DataFrame, Sequence[Dict[str, Any]]]


def _as_frame(rows: Rows, columns: Optional[List[str]] = None) -> pd.DataFrame:
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    if columns is not None and isinstance(rows, pd.DataFrame):
        frame = frame[columns]
    return frame


def _dumps(data: Any) -> bytes:
    return orjson.dumps(
        data,
        option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
        default=str,
    ) + b"\n"


def write_table(
    rows: Rows,
    out_dir: Union[str, Path],
    name: str,
    fmt: TableFormat = "csv",
    columns: Optional[List[str]] = None,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame = _as_frame(rows, columns)
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    elif fmt == "json":
        path = out_dir / f"{name}.json"
        # missing values (NaN, pd.NA) become null
        cleaned = frame.astype(object).where(frame.notna(), None)
        path.write_bytes(_dumps(cleaned.to_dict(orient="records")))
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    return path


def write_json(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_dumps(data))
    return path


class RunOutput:
    """Output directory of one run plus its metadata file."""

    METADATA_FILE = "run_metadata.json"

    def __init__(self, out_dir: Union[str, Path], fmt: TableFormat = "csv"):
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.files: List[str] = []
        self._metadata: Dict[str, Any] = {}

    @property
    def metadata_path(self) -> Path:
        return self.out_dir / self.METADATA_FILE

    def start(self, kind: str, config_echo: Dict[str, Any], seed: Optional[int], extra: Optional[Dict[str, Any]] = None):
        self._metadata = {
            "schema_version": 1,
            "kind": kind,
            "seed": seed,
            "provenance": provenance_string(),
            "config": config_echo,
            "status": "incomplete",
            "files": [],
            **(extra or {}),
        }
        write_json(self._metadata, self.metadata_path)

    def table(self, rows: Rows, name: str, columns: Optional[List[str]] = None) -> Path:
        path = write_table(rows, self.out_dir, name, self.fmt, columns)
        self.files.append(path.name)
        return path

    def document(self, data: Any, name: str) -> Path:
        path = write_json(data, self.out_dir / f"{name}.json")
        self.files.append(path.name)
        return path

    def finish(self, summary: Optional[Dict[str, Any]] = None):
        self._metadata.update({"status": "complete", "files": sorted(self.files)})
        if summary is not None:
            self._metadata["summary"] = summary
        write_json(self._metadata, self.metadata_path)
