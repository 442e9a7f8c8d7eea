"""Layered networks: best paths, sum capacity and fundamental modes.

Each layer is an interference hop described by its 3x3 parameter grid; a
message travels along a path of virtual nodes, one link per layer. With an
optimal split of the resource along the path, its rate is the harmonic mean
of the link parameters, so the best path minimizes sum(1 / sigma_sq).
"""

import logging
from dataclasses import InitVar, dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DeadLinkInModeError, DimensionMismatchError, EmptyListError, InvalidGridError, InvalidSchemeError
from .probability import frozen_array
from .singlehop import NODES, IcParameterGrid, ensure_valid_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayeredNetwork:
    layers: Tuple[IcParameterGrid, ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        layers = tuple(self.layers)
        if not layers:
            raise EmptyListError("A layered network needs at least one layer")
        if check:
            for index, grid in enumerate(layers):
                try:
                    ensure_valid_grid(grid)
                except InvalidGridError as e:
                    raise InvalidGridError(f"Layer {index}: {e.detail}", layer=index, **e.context) from e
        object.__setattr__(self, "layers", layers)

    @classmethod
    def replicate(cls, grid: IcParameterGrid, num_layers: int, check: bool = True) -> "LayeredNetwork":
        if num_layers < 1:
            raise EmptyListError(f"Cannot replicate a grid {num_layers} times")
        return cls(tuple([grid] * num_layers), check)

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def sigma_sq(self) -> np.ndarray:
        """Stacked parameters, shape (L, 3, 3)."""
        return np.stack([layer.sigma_sq for layer in self.layers])

    def costs(self) -> np.ndarray:
        """Per-link cost 1/sigma_sq, infinite on dead links."""
        sigma = self.sigma_sq()
        with np.errstate(divide="ignore"):
            return np.where(sigma > 0.0, 1.0 / np.where(sigma > 0.0, sigma, 1.0), np.inf)


@dataclass(frozen=True)
class Path:
    nodes: Tuple[int, ...]
    dead: bool = False

    @property
    def links(self) -> List[Tuple[int, int, int]]:
        """(layer, from, to) for every hop."""
        return [(layer, self.nodes[layer], self.nodes[layer + 1]) for layer in range(len(self.nodes) - 1)]

    def label(self) -> str:
        return "-".join(str(node) for node in self.nodes)


@dataclass(frozen=True, eq=False)
class Scheme:
    """Resource allocation delta[layer][i][j] of an L-layer network.

    The normalized total sum(delta) / L may not exceed 1.
    """
    delta: np.ndarray

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        if delta.ndim == 2:
            delta = delta[None, :, :]
        if delta.ndim != 3 or delta.shape[1:] != (3, 3) or delta.shape[0] < 1:
            raise DimensionMismatchError(f"Scheme must have shape (L, 3, 3), got {delta.shape}", shape=list(delta.shape))
        if not np.all(np.isfinite(delta)) or np.any(delta < 0.0):
            raise InvalidSchemeError("Scheme entries must be finite and non-negative")
        normalized = float(delta.sum()) / delta.shape[0]
        if normalized > 1.0 + 1e-9:
            raise InvalidSchemeError(
                f"Scheme uses {normalized:.12g} of the per-layer budget",
                normalized_total=normalized,
            )
        object.__setattr__(self, "delta", frozen_array(delta))

    @property
    def num_layers(self) -> int:
        return int(self.delta.shape[0])

    @property
    def total(self) -> float:
        return float(self.delta.sum())

    @property
    def normalized_total(self) -> float:
        return self.total / self.num_layers

    def layer(self, index: int = 0) -> np.ndarray:
        return self.delta[index]

    def tolist(self):
        return self.delta.tolist()


class PathResult(NamedTuple):
    sigma_sq: float
    path: Path


@dataclass(frozen=True)
class Mode:
    """A cycle of virtual nodes repeated in every layer."""
    name: str
    cycle: Tuple[int, ...]

    @property
    def links(self) -> List[Tuple[int, int]]:
        size = len(self.cycle)
        return [(self.cycle[k], self.cycle[(k + 1) % size]) for k in range(size)]


class ModeResult(NamedTuple):
    value: float
    mode: Mode


MODES: Tuple[Mode, ...] = (
    Mode("s11", (1,)),
    Mode("s00", (0,)),
    Mode("s22", (2,)),
    Mode("M(s10,s01)", (1, 0)),
    Mode("M(s20,s02)", (2, 0)),
    Mode("M(s12,s21)", (1, 2)),
    Mode("M(s10,s02,s21)", (1, 0, 2)),
    Mode("M(s20,s01,s12)", (2, 0, 1)),
)


def harmonic_mean(values: Iterable[float]) -> float:
    """k / sum(1/v); zero as soon as one value is zero."""
    values = [float(v) for v in values]
    if not values:
        raise EmptyListError("Harmonic mean of an empty list")
    if any(v <= 0.0 for v in values):
        return 0.0
    return len(values) / sum(1.0 / v for v in values)


def _viterbi(costs: np.ndarray, starts: Sequence[int], ends: Sequence[int]) -> Tuple[float, Tuple[int, ...]]:
    """Minimal total cost over node sequences, lexicographically smallest among exact ties.

    Totals are accumulated from the last layer backwards (cost + cost-to-go).
    """
    num_layers = costs.shape[0]
    to_go = np.zeros(len(NODES))
    choice = np.zeros((num_layers, len(NODES)), dtype=int)

    allowed = np.array(sorted(ends))
    for layer in range(num_layers - 1, -1, -1):
        totals = costs[layer][:, allowed] + to_go[allowed][None, :]
        best = np.argmin(totals, axis=1)
        choice[layer] = allowed[best]
        to_go = totals[np.arange(len(NODES)), best]
        allowed = np.array(NODES)

    starts = np.array(sorted(starts))
    first = int(starts[np.argmin(to_go[starts])])
    nodes = [first]
    for layer in range(num_layers):
        nodes.append(int(choice[layer, nodes[-1]]))
    return float(to_go[first]), tuple(nodes)


def best_path(net: LayeredNetwork, i: int, j: int) -> PathResult:
    """Region parameter sigma_ij^2 = 1 / (minimal path cost) and the path achieving it."""
    if i not in NODES or j not in NODES:
        raise DimensionMismatchError(f"Virtual nodes are 0, 1, 2; got ({i}, {j})")
    total, nodes = _viterbi(net.costs(), [i], [j])
    if not np.isfinite(total):
        return PathResult(0.0, Path(nodes, dead=True))
    return PathResult(1.0 / total, Path(nodes))


def layered_region_params(net: LayeredNetwork) -> IcParameterGrid:
    grid = np.zeros((3, 3))
    for i in NODES:
        for j in NODES:
            grid[i, j] = best_path(net, i, j).sigma_sq
    return IcParameterGrid(grid)


def sum_capacity(net: LayeredNetwork) -> PathResult:
    """Largest harmonic mean over all node sequences (free source and destination)."""
    total, nodes = _viterbi(net.costs(), NODES, NODES)
    if not np.isfinite(total):
        return PathResult(0.0, Path(nodes, dead=True))
    return PathResult(net.num_layers / total, Path(nodes))


def path_allocation(net: LayeredNetwork, path: Path) -> Scheme:
    """Split the budget L along ``path`` so every link carries the same rate.

    A dead path gets the empty scheme.
    """
    if len(path.nodes) != net.num_layers + 1:
        raise DimensionMismatchError(
            f"Path has {len(path.nodes)} nodes for {net.num_layers} layers",
            nodes=len(path.nodes),
            layers=net.num_layers,
        )
    delta = np.zeros((net.num_layers, 3, 3))
    values = [net.layers[layer][a, b] for layer, a, b in path.links]
    rate = harmonic_mean(values)
    if rate <= 0.0:
        return Scheme(delta)
    for (layer, a, b), value in zip(path.links, values):
        delta[layer, a, b] = rate / value
    return Scheme(delta)


def resolve_mode(mode: Union[str, Mode]) -> Mode:
    if isinstance(mode, Mode):
        return mode
    for candidate in MODES:
        if candidate.name == mode or feedback_mode_name(candidate) == mode:
            return candidate
    raise DimensionMismatchError(f"Unknown mode {mode!r}", modes=[m.name for m in MODES])


def feedback_mode_name(mode: Mode) -> str:
    return mode.name.replace("s10", "s10fb").replace("s20", "s20fb")


def mode_values(g: IcParameterGrid) -> Dict[str, float]:
    return {mode.name: harmonic_mean(g[a, b] for a, b in mode.links) for mode in MODES}


def identical_layer_sum_capacity(g: IcParameterGrid, check: bool = True) -> ModeResult:
    """Sum capacity of infinitely many identical layers: the best of the eight modes."""
    if check:
        ensure_valid_grid(g)
    values = mode_values(g)
    best: Optional[ModeResult] = None
    for mode in MODES:
        if best is None or values[mode.name] > best.value:
            best = ModeResult(values[mode.name], mode)
    return best


def mode_allocation(g: IcParameterGrid, mode: Union[str, Mode]) -> Scheme:
    """Single-layer scheme running ``mode`` with equal flow on each of its k links."""
    mode = resolve_mode(mode)
    dead = [f"{a}{b}" for a, b in mode.links if g[a, b] <= 0.0]
    if dead:
        raise DeadLinkInModeError(f"Mode {mode.name} uses dead link sigma{dead[0]}", mode=mode.name, links=dead)

    value = harmonic_mean(g[a, b] for a, b in mode.links)
    delta = np.zeros((3, 3))
    for a, b in mode.links:
        delta[a, b] = value / (len(mode.cycle) * g[a, b])
    return Scheme(delta)
