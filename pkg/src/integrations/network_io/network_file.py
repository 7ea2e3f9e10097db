"""
network_file.py
---------------
Import/export of networks as JSON documents.

File shape (node indices 0-based, tables MSB-first over the listed inputs):

    {
      "format": "rbn-network",
      "version": 1,
      "n": 3,
      "inputs": [[1, 2], [0, 2], [0, 1]],
      "tables": ["0111", "0001", "0110"]
    }

`dumps_network` is canonical (sorted keys, two-space indent, trailing
newline), so export(import(file)) reproduces a canonical file byte for byte.

Import validates everything the BooleanNetwork constructor would reject, but
reports it against the file: path, JSON line for syntax errors, and the field
("tables[3]", "inputs[0][1]") for shape errors. Self-loops and duplicate
inputs are accepted; they show up in `net.structural_flags()`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.network.core import BooleanNetwork, TruthTable
from src.network.errors import ContractViolation, NetworkFileError

FORMAT_NAME = "rbn-network"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


# =============================================================================
# Export
# =============================================================================


def network_to_document(net: BooleanNetwork) -> Dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": net.n_nodes,
        "inputs": [list(row) for row in net.inputs],
        "tables": [t.to_string() for t in net.tables],
    }


def dumps_network(net: BooleanNetwork) -> str:
    return json.dumps(network_to_document(net), indent=2, sort_keys=True) + "\n"


def export_network(net: BooleanNetwork, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_network(net), encoding="utf-8")
    return path


# =============================================================================
# Import
# =============================================================================


def _is_int(value: Any) -> bool:
    # JSON true/false decode to bool, which is an int subclass
    return isinstance(value, int) and not isinstance(value, bool)


def network_from_document(doc: Any, path: Optional[str] = None) -> BooleanNetwork:
    """
    Validate a decoded document and build the network.

    Raises:
        NetworkFileError with the offending field.
    """

    def fail(message: str, field: Optional[str] = None):
        raise NetworkFileError(message, path=path, field=field)

    if not isinstance(doc, dict):
        fail("top level must be a JSON object")

    fmt = doc.get("format", FORMAT_NAME)
    if fmt != FORMAT_NAME:
        fail(f"unknown format {fmt!r}, expected {FORMAT_NAME!r}", "format")
    version = doc.get("version", FORMAT_VERSION)
    if not _is_int(version) or not 1 <= version <= FORMAT_VERSION:
        fail(f"unsupported version {version!r}", "version")

    for key in ("n", "inputs", "tables"):
        if key not in doc:
            fail("missing required field", key)

    n = doc["n"]
    if not _is_int(n) or n < 1:
        fail(f"must be a positive integer, got {n!r}", "n")

    inputs = doc["inputs"]
    if not isinstance(inputs, list) or len(inputs) != n:
        fail(f"must be a list of {n} input lists", "inputs")
    rows: List[List[int]] = []
    for i, row in enumerate(inputs):
        if not isinstance(row, list) or not row:
            fail("must be a non-empty list of node indices", f"inputs[{i}]")
        for j, src in enumerate(row):
            if not _is_int(src) or not 0 <= src < n:
                fail(f"node index {src!r} outside [0, {n})", f"inputs[{i}][{j}]")
        rows.append(list(row))

    tables = doc["tables"]
    if not isinstance(tables, list) or len(tables) != n:
        fail(f"must be a list of {n} bitstrings", "tables")
    parsed: List[TruthTable] = []
    for i, bits in enumerate(tables):
        expected = 1 << len(rows[i])
        if not isinstance(bits, str) or any(c not in "01" for c in bits):
            fail(f"must be a string of 0/1, got {bits!r}", f"tables[{i}]")
        if len(bits) != expected:
            fail(
                f"length {len(bits)} does not match 2^k = {expected} for {len(rows[i])} inputs",
                f"tables[{i}]",
            )
        parsed.append(TruthTable.from_string(bits))

    try:
        return BooleanNetwork(rows, parsed)
    except ContractViolation as e:  # pragma: no cover - checks above mirror the constructor
        raise NetworkFileError(str(e), path=path) from e


def loads_network(text: str, path: Optional[str] = None) -> BooleanNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkFileError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from e
    return network_from_document(doc, path)


def import_network(path: PathLike) -> BooleanNetwork:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise NetworkFileError(f"cannot read file: {e.strerror}", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise NetworkFileError(f"not UTF-8 text: {e.reason} at byte {e.start}", path=str(path)) from e
    return loads_network(text, str(path))
