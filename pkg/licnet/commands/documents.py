"""Reading, binding and writing network documents.

``parse_document`` turns JSON text into a validated ``NetworkDocument``;
``bind`` evaluates its ``$alpha`` expressions and builds the numeric objects
the commands run on.
"""

import ast
import json
import logging
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match
from pydantic import ValidationError

from licnet.core.errors import (
    DocumentSchemaError,
    DocumentSyntaxError,
    DocumentValidationError,
    LicError,
)
from licnet.core.multihop import Scheme
from licnet.core.probability import ChannelMatrix, ProbabilityVector, validate_channel, validate_distribution
from licnet.core.singlehop import IcParameterGrid, validate_grid
from licnet.models.network import (
    NETWORK_SCHEMA,
    STRUCTURE_KEYS,
    Entry,
    GridLayer,
    NetworkDocument,
    NetworkKind,
    StructureLayer,
)

logger = logging.getLogger(__name__)

ALPHA_TOKEN = re.compile(r"\$alpha\b")
_ALPHA_NAME = "__alpha__"
_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}

_validator = Draft7Validator(NETWORK_SCHEMA)

Layer = Union[IcParameterGrid, Dict[str, str]]


@dataclass
class BoundDocument:
    """A document with every entry evaluated and validated."""
    document: NetworkDocument
    alpha: Optional[float]
    channels: Dict[str, ChannelMatrix] = field(default_factory=dict)
    input_dists: Dict[str, ProbabilityVector] = field(default_factory=dict)
    layers: List[Layer] = field(default_factory=list)
    scheme: Optional[Scheme] = None
    path: Optional[str] = None

    @property
    def kind(self) -> str:
        return self.document.kind.value

    @property
    def structure(self) -> Dict[str, str]:
        return self.document.structure or {}

    @property
    def feedback(self) -> bool:
        return self.document.feedback

    @property
    def identical_layers(self) -> bool:
        return self.document.identical_layers


def evaluate_expression(text: str, alpha: Optional[float], where: str = "entry") -> float:
    """Value of a literal or an arithmetic expression over $alpha."""
    try:
        tree = ast.parse(ALPHA_TOKEN.sub(_ALPHA_NAME, text.strip()), mode="eval")
    except SyntaxError as e:
        raise DocumentValidationError(f"{where}: cannot parse expression {text!r}", field=where) from e

    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == _ALPHA_NAME:
            if alpha is None:
                raise DocumentValidationError(f"{where}: $alpha has no value (pass --alpha)", field=where)
            return float(alpha)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        raise DocumentValidationError(f"{where}: {text!r} is not an arithmetic expression over $alpha", field=where)

    try:
        value = walk(tree.body)
    except ZeroDivisionError as e:
        raise DocumentValidationError(f"{where}: division by zero in {text!r}", field=where) from e
    if not math.isfinite(value):
        raise DocumentValidationError(f"{where}: {text!r} is not finite", field=where)
    return value


def _evaluate_rows(rows: Sequence[Sequence[Entry]], alpha: Optional[float], where: str) -> np.ndarray:
    return np.array([
        [value if not isinstance(value, str) else evaluate_expression(value, alpha, f"{where}.{r}.{c}")
         for c, value in enumerate(row)]
        for r, row in enumerate(rows)
    ], dtype=float)


def _field(location: Sequence) -> str:
    return ".".join(str(part) for part in location) or "<root>"


def _read(source: Union[str, Path]) -> str:
    if isinstance(source, Path):
        try:
            return source.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise DocumentSyntaxError(f"Cannot read {source}: {str(e)}", path=str(source)) from e
    return source


def parse_document(source: Union[str, Path]) -> NetworkDocument:
    """Validate JSON text (or the file at a ``Path``) as a network document.

    Entries without expressions, or with a document-level ``alpha``, are
    also evaluated so numeric problems surface at parse time.
    """
    text = _read(source)
    if not text.strip():
        raise DocumentSyntaxError("Document is empty", line=1, column=1)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(f"Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", line=e.lineno, column=e.colno) from e

    error = best_match(_validator.iter_errors(data))
    if error is not None:
        where = _field(error.absolute_path)
        raise DocumentSchemaError(f"{where}: {error.message}", field=where)

    try:
        document = NetworkDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = _field(first["loc"])
        raise DocumentValidationError(f"{where}: {first['msg']}", field=where) from e

    _check_references(document)
    if not document.expressions() or document.alpha is not None:
        bind(document)
    return document


def load_document(path: Union[str, Path]) -> NetworkDocument:
    return parse_document(Path(path))


def _structure_form(kind: str, structure: Dict[str, str], where: str) -> List[str]:
    for keys in STRUCTURE_KEYS[kind]:
        if set(structure) == set(keys):
            return keys
    expected = " or ".join("{" + ", ".join(keys) + "}" for keys in STRUCTURE_KEYS[kind])
    raise DocumentValidationError(
        f"{where}: {kind} wiring needs {expected}, got {sorted(structure)}",
        field=where,
    )


def _check_wiring(document: NetworkDocument, kind: str, structure: Dict[str, str], where: str):
    keys = _structure_form(kind, structure, where)
    for key in keys:
        name = structure[key]
        pool = document.input_dists if key.startswith("p") else document.channels
        if name not in pool:
            section = "input_dists" if key.startswith("p") else "channels"
            raise DocumentValidationError(f"{where}.{key}: no {section} entry named {name!r}", field=f"{where}.{key}")

    def cols(key: str) -> int:
        return document.channels[structure[key]].cols

    def size(key: str) -> int:
        return len(document.input_dists[structure[key]])

    expected: Dict[str, int] = {}
    if kind == "p2p":
        expected = {"w": size("p")}
    elif kind == "bc":
        expected = {"w1": size("p"), "w2": size("p")}
    elif kind == "mac":
        expected = {"w": size("p1") * size("p2")}
    elif "y1" in structure:
        expected = {"y1": size("p1") * size("p2"), "y2": size("p1") * size("p2")}
    else:
        expected = {"w11": size("p1"), "w12": size("p1"), "w21": size("p2"), "w22": size("p2")}
    for key, count in expected.items():
        if cols(key) != count:
            raise DocumentValidationError(
                f"{where}.{key}: channel {structure[key]!r} has {cols(key)} inputs, the wiring needs {count}",
                field=f"{where}.{key}",
            )


def _check_references(document: NetworkDocument):
    for name, channel in document.channels.items():
        shape_ok = len(channel.entries) == channel.rows and all(len(row) == channel.cols for row in channel.entries)
        if not shape_ok:
            raise DocumentValidationError(
                f"channels.{name}: entries do not form a {channel.rows} x {channel.cols} matrix",
                field=f"channels.{name}.entries",
            )

    kind = document.kind
    if kind != NetworkKind.LAYERED:
        if document.layers is not None or document.identical_layers:
            raise DocumentValidationError("layers: only layered documents have layers", field="layers")
        if document.structure is None:
            raise DocumentValidationError(f"structure: {kind.value} documents need a structure", field="structure")
        _check_wiring(document, kind.value, document.structure, "structure")
        return

    if not document.layers:
        raise DocumentValidationError("layers: a layered document needs at least one layer", field="layers")
    if document.identical_layers and len(document.layers) != 1:
        raise DocumentValidationError("layers: identical_layers takes exactly one layer", field="layers")
    for index, layer in enumerate(document.layers):
        if isinstance(layer, StructureLayer):
            _check_wiring(document, "ic", layer.structure, f"layers.{index}.structure")


def _wrapped(where: str, e: LicError) -> DocumentValidationError:
    return DocumentValidationError(f"{where}: {e.detail}", field=where, cause=e.code, **e.context)


def bind(document: NetworkDocument, alpha: Optional[float] = None, path: Optional[str] = None) -> BoundDocument:
    """Evaluate every entry at ``alpha`` (default: the document's own) and validate the numbers."""
    value = document.alpha if alpha is None else alpha
    pending = document.expressions()
    if pending and value is None:
        raise DocumentValidationError(f"{pending[0]}: $alpha has no value (pass --alpha)", field=pending[0])

    bound = BoundDocument(document=document, alpha=value if pending else alpha, path=path)
    for name, spec in document.channels.items():
        where = f"channels.{name}"
        try:
            bound.channels[name] = validate_channel(_evaluate_rows(spec.entries, value, f"{where}.entries"))
        except DocumentValidationError:
            raise
        except LicError as e:
            raise _wrapped(where, e) from e

    for name, entries in document.input_dists.items():
        where = f"input_dists.{name}"
        try:
            bound.input_dists[name] = validate_distribution(_evaluate_rows([entries], value, where)[0])
        except DocumentValidationError:
            raise
        except LicError as e:
            raise _wrapped(where, e) from e

    for index, layer in enumerate(document.layers or []):
        where = f"layers.{index}"
        if isinstance(layer, GridLayer):
            try:
                grid = IcParameterGrid(_evaluate_rows(layer.sigma_sq, value, f"{where}.sigma_sq"))
            except DocumentValidationError:
                raise
            except LicError as e:
                raise _wrapped(f"{where}.sigma_sq", e) from e
            violations = validate_grid(grid)
            if violations:
                raise DocumentValidationError(
                    f"{where}.sigma_sq: {violations[0].message}",
                    field=f"{where}.sigma_sq",
                    chain=violations[0].chain,
                    violations=[v.chain for v in violations],
                )
            bound.layers.append(grid)
        else:
            bound.layers.append(dict(layer.structure))

    if document.scheme is not None:
        try:
            bound.scheme = Scheme(_evaluate_rows(document.scheme, value, "scheme"))
        except DocumentValidationError:
            raise
        except LicError as e:
            raise _wrapped("scheme", e) from e

    logger.debug(f"bound {bound.kind} document at alpha={value}")
    return bound


def serialize(document: NetworkDocument) -> str:
    """Canonical text: keys sorted, two-space indent, only fields the source set."""
    return json.dumps(document.model_dump(mode="json", exclude_unset=True), indent=2, sort_keys=True)


def canonical(text: str) -> str:
    return json.dumps(json.loads(text), indent=2, sort_keys=True)
