"""Network documents: the JSON files every ``licnet`` command reads.

Matrix entries are numbers or arithmetic expressions over ``$alpha``; they
stay unevaluated here and are bound by ``licnet.commands.documents.bind``.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

Entry = Union[float, str]

# wiring keys each kind needs in "structure" (ic accepts either form)
STRUCTURE_KEYS: Dict[str, List[List[str]]] = {
    "p2p": [["w", "p"]],
    "bc": [["w1", "w2", "p"]],
    "mac": [["w", "p1", "p2"]],
    "ic": [["w11", "w12", "w21", "w22", "p1", "p2"], ["y1", "y2", "p1", "p2"]],
}

_ENTRY_SCHEMA = {"type": ["number", "string"]}
_MATRIX_SCHEMA = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _ENTRY_SCHEMA}}
_GRID_SCHEMA = {
    "type": "array",
    "minItems": 3,
    "maxItems": 3,
    "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": _ENTRY_SCHEMA},
}
_STRUCTURE_SCHEMA = {"type": "object", "additionalProperties": {"type": "string"}}

NETWORK_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "licnet network document",
    "type": "object",
    "required": ["version", "kind"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": 1},
        "kind": {"enum": ["p2p", "bc", "mac", "ic", "layered"]},
        "channels": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["rows", "cols", "entries"],
                "additionalProperties": False,
                "properties": {
                    "rows": {"type": "integer", "minimum": 1},
                    "cols": {"type": "integer", "minimum": 1},
                    "entries": _MATRIX_SCHEMA,
                },
            },
        },
        "input_dists": {
            "type": "object",
            "additionalProperties": {"type": "array", "minItems": 1, "items": _ENTRY_SCHEMA},
        },
        "structure": _STRUCTURE_SCHEMA,
        "layers": {
            "type": "array",
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["sigma_sq"],
                        "additionalProperties": False,
                        "properties": {"sigma_sq": _GRID_SCHEMA},
                    },
                    {
                        "type": "object",
                        "required": ["structure"],
                        "additionalProperties": False,
                        "properties": {"structure": _STRUCTURE_SCHEMA},
                    },
                ]
            },
        },
        "feedback": {"type": "boolean"},
        "alpha": {"type": "number"},
        "identical_layers": {"type": "boolean"},
        "scheme": _GRID_SCHEMA,
    },
}


class NetworkKind(str, Enum):
    P2P = "p2p"
    BC = "bc"
    MAC = "mac"
    IC = "ic"
    LAYERED = "layered"


class ChannelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rows: int = Field(..., ge=1, description="Output alphabet size |Y|")
    cols: int = Field(..., ge=1, description="Input alphabet size |X|")
    entries: List[List[Entry]] = Field(..., description="Row-major W(y|x), columns sum to 1")


class GridLayer(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sigma_sq: List[List[Entry]] = Field(..., description="Inline 3x3 parameter grid")


class StructureLayer(BaseModel):
    model_config = ConfigDict(extra="forbid")

    structure: Dict[str, str] = Field(..., description="Interference channel wiring of this layer")


class NetworkDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: int = Field(1, description="Document format version")
    kind: NetworkKind
    channels: Dict[str, ChannelSpec] = Field(default_factory=dict)
    input_dists: Dict[str, List[Entry]] = Field(default_factory=dict)
    structure: Optional[Dict[str, str]] = Field(None, description="Kind-specific wiring of channels and inputs")
    layers: Optional[List[Union[GridLayer, StructureLayer]]] = None
    feedback: bool = Field(False, description="Decoded messages are fed back to the transmitters")
    alpha: Optional[float] = Field(None, description="Value of $alpha when --alpha is not given")
    identical_layers: bool = Field(False, description="layers[0] repeats indefinitely")
    scheme: Optional[List[List[Entry]]] = Field(None, description="Single-layer allocation consumed by repair")

    def expressions(self) -> List[str]:
        """Dotted paths of every entry that still holds an expression."""
        found = []
        for name, channel in self.channels.items():
            found += _string_paths(channel.entries, f"channels.{name}.entries")
        for name, values in self.input_dists.items():
            found += _string_paths([values], f"input_dists.{name}", flat=True)
        for index, layer in enumerate(self.layers or []):
            if isinstance(layer, GridLayer):
                found += _string_paths(layer.sigma_sq, f"layers.{index}.sigma_sq")
        if self.scheme is not None:
            found += _string_paths(self.scheme, "scheme")
        return found


def _string_paths(rows: List[List[Entry]], prefix: str, flat: bool = False) -> List[str]:
    paths = []
    for r, row in enumerate(rows):
        for c, value in enumerate(row):
            if isinstance(value, str):
                paths.append(f"{prefix}.{c}" if flat else f"{prefix}.{r}.{c}")
    return paths
