"""CSV and JSON writers with byte-stable float formatting."""

import io
import json
import math
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

from gradfit.constants import FLOAT_FORMAT, SCHEMA_TAG
from gradfit.logger import get_logger

logger = get_logger()


def format_value(value) -> str:
    """CSV cell: repr-exact floats, empty for None, lowercase booleans."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT % value
    return str(value)


def format_csv(rows: Iterable[Dict], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    buffer.write(",".join(columns) + "\n")
    for row in rows:
        buffer.write(",".join(format_value(row.get(column)) for column in columns) + "\n")
    return buffer.getvalue()


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def tagged(record: Dict) -> Dict:
    """The record with the schema tag first and non-finite floats as strings."""
    return {"schema": SCHEMA_TAG, **_json_safe(record)}


def format_jsonl(records: Iterable[Dict]) -> str:
    return "".join(json.dumps(tagged(r), sort_keys=False) + "\n" for r in records)


def _write(text: str, path: Optional[str], stream: Optional[TextIO] = None):
    if path is None:
        (stream or sys.stdout).write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    logger.debug(f"Wrote {target}")


def write_csv(rows: List[Dict], columns: Sequence[str], path: Optional[str] = None):
    _write(format_csv(rows, columns), path)


def write_jsonl(records: Iterable[Dict], path: Optional[str] = None):
    _write(format_jsonl(records), path)


def write_json(record: Dict, path: Optional[str] = None):
    _write(json.dumps(tagged(record), indent=2) + "\n", path)


def jsonl_path(csv_path: Optional[str]) -> Optional[str]:
    """Run log location next to the CSV: same stem, suffix .jsonl."""
    if csv_path is None:
        return None
    return str(Path(csv_path).with_suffix(".jsonl"))


def coefficient_csv(rows: Iterable[Sequence], path: Optional[str] = None):
    """``dof_id,x,y,value`` rows as produced by ``coefficient_rows``."""
    columns = ("dof_id", "x", "y", "value")
    write_csv([dict(zip(columns, row)) for row in rows], columns, path)
