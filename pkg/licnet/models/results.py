import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field


class CommandResult(BaseModel):
    """What a command prints: the command, the source document and its values."""

    command: str = Field(..., description="Command that produced the result")
    kind: str = Field(..., description="Kind of the network document")
    document: Optional[str] = Field(None, description="Path of the source document")
    alpha: Optional[float] = Field(None, description="Value bound to $alpha, if any")
    values: Dict[str, Any] = Field(default_factory=dict)

    def payload(self, digits: int = 12) -> Dict[str, Any]:
        data = {"command": self.command, "kind": self.kind, "values": rounded(self.values, digits)}
        if self.document is not None:
            data["document"] = self.document
        if self.alpha is not None:
            data["alpha"] = rounded(self.alpha, digits)
        return data

    def to_json(self, digits: int = 12) -> str:
        return json.dumps(self.payload(digits), indent=2, sort_keys=True)

    def rows(self, digits: int = 12) -> List[Tuple[str, Any]]:
        return flatten(rounded(self.values, digits))

    def to_csv(self, digits: int = 12) -> str:
        return rows_to_csv(self.rows(digits))


def rounded(value: Any, digits: int = 12) -> Any:
    """Round every float to ``digits`` significant digits, recursively."""
    if isinstance(value, np.ndarray):
        return rounded(value.tolist(), digits)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {str(key): rounded(item, digits) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(item, digits) for item in value]
    return value


def flatten(value: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    """(dotted key, scalar) pairs in key order; list positions become indices."""
    if isinstance(value, dict):
        items = sorted(value.items())
    elif isinstance(value, list):
        items = list(enumerate(value))
    else:
        return [(prefix, value)]
    rows = []
    for key, item in items:
        rows += flatten(item, f"{prefix}.{key}" if prefix else str(key))
    return rows


def rows_to_csv(rows: List[Tuple[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["quantity", "value"])
    for key, value in rows:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif value is None:
            value = ""
        writer.writerow([key, value])
    return buffer.getvalue()
