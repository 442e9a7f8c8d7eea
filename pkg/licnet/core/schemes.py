"""Flow bookkeeping of allocation schemes.

For a scheme, the flow on link (i, j) of layer l is delta * sigma_sq. A scheme
is balanced when every intermediate node forwards what it receives and, end
to end, each virtual node sends into layer 1 what it collects from layer L.
The end-to-end mismatch summed over nodes is the scheme's gamma.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .config import settings
from .errors import DimensionMismatchError, UnrepairableZeroPatternError
from .lp import LpProblem, solve_lp
from .multihop import LayeredNetwork, Scheme
from .singlehop import IcParameterGrid

logger = logging.getLogger(__name__)

Network = Union[IcParameterGrid, LayeredNetwork]
LABELS = [f"{i}{j}" for i in range(3) for j in range(3)]


@dataclass(frozen=True)
class ImbalanceReport:
    imbalance: np.ndarray  # outflow into layer 1 minus inflow from layer L, per node
    gamma: float
    residuals: np.ndarray  # (L - 1, 3): inflow minus outflow at intermediate nodes

    def balanced(self, tolerance: float = 1e-9) -> bool:
        return self.gamma <= tolerance and bool(np.all(np.abs(self.residuals) <= tolerance))


@dataclass(frozen=True)
class GammaScheme:
    scheme: Scheme
    grid: IcParameterGrid
    gamma: float

    def __post_init__(self):
        recomputed = flow_imbalance(self.scheme, self.grid).gamma
        if abs(recomputed - self.gamma) > 1e-9:
            raise DimensionMismatchError(
                f"Stored gamma {self.gamma:.12g} does not match the scheme ({recomputed:.12g})",
                gamma=self.gamma,
                recomputed=recomputed,
            )


@dataclass(frozen=True)
class RepairResult:
    scheme: Scheme
    epsilon: float
    bound: float
    max_change: float
    added: float


def _sigma_stack(network: Network, num_layers: int) -> np.ndarray:
    if isinstance(network, IcParameterGrid):
        return np.broadcast_to(network.sigma_sq, (num_layers, 3, 3))
    if network.num_layers != num_layers:
        raise DimensionMismatchError(
            f"Scheme has {num_layers} layers, network has {network.num_layers}",
            scheme_layers=num_layers,
            network_layers=network.num_layers,
        )
    return network.sigma_sq()


def flows(scheme: Scheme, network: Network) -> np.ndarray:
    return scheme.delta * _sigma_stack(network, scheme.num_layers)


def _imbalance(flow: np.ndarray) -> np.ndarray:
    return flow[0].sum(axis=1) - flow[-1].sum(axis=0)


def flow_imbalance(scheme: Scheme, network: Network) -> ImbalanceReport:
    flow = flows(scheme, network)
    imbalance = _imbalance(flow)
    residuals = flow[:-1].sum(axis=1) - flow[1:].sum(axis=2)
    return ImbalanceReport(imbalance, float(np.abs(imbalance).sum()), residuals)


def gamma_scheme(scheme: Scheme, grid: IcParameterGrid) -> GammaScheme:
    return GammaScheme(scheme, grid, flow_imbalance(scheme, grid).gamma)


def throughput(scheme: Scheme, network: Network) -> float:
    """Average over layers of the flow carried by each layer."""
    return float(flows(scheme, network).sum()) / scheme.num_layers


def layer_average(scheme: Scheme) -> Scheme:
    return Scheme(scheme.delta.mean(axis=0))


def _imbalance_rows(sigma: np.ndarray) -> np.ndarray:
    """Row k maps the 9 deltas (row-major) to outflow_k - inflow_k."""
    rows = np.zeros((3, 9))
    for i in range(3):
        for j in range(3):
            rows[i, 3 * i + j] += sigma[i, j]
            rows[j, 3 * i + j] -= sigma[i, j]
    return rows


def gamma_capacity(grid: IcParameterGrid, epsilon: float) -> Tuple[float, Scheme]:
    """Best single-layer throughput among schemes with gamma <= epsilon.

    Variables are the nine deltas followed by t_0..t_2 bounding |imbalance_k|.
    """
    if epsilon < 0.0:
        raise DimensionMismatchError(f"Imbalance budget {epsilon} is negative", epsilon=epsilon)
    sigma = grid.sigma_sq
    rows = _imbalance_rows(sigma)
    slack = np.eye(3)

    a_ub = np.vstack([
        np.concatenate([np.ones(9), np.zeros(3)]),
        np.hstack([rows, -slack]),
        np.hstack([-rows, -slack]),
        np.concatenate([np.zeros(9), np.ones(3)]),
    ])
    b_ub = np.concatenate([[1.0], np.zeros(6), [epsilon]])
    problem = LpProblem(
        objective=np.concatenate([sigma.reshape(-1), np.zeros(3)]),
        a_ub=a_ub,
        b_ub=b_ub,
        labels=LABELS + ["t0", "t1", "t2"],
    )
    solution = solve_lp(problem)
    delta = np.clip(solution.x[:9].reshape(3, 3), 0.0, None)
    total = delta.sum()
    if total > 1.0:
        delta /= total
    return solution.value, Scheme(delta)


def flow_balance_capacity(grid: IcParameterGrid) -> Tuple[float, Scheme]:
    """Best throughput of a balanced single-layer scheme."""
    return gamma_capacity(grid, 0.0)


def _zero_links(sigma: np.ndarray) -> np.ndarray:
    return sigma <= settings.internal_tolerance


def repair_bound(grid: IcParameterGrid, epsilon: float) -> float:
    """Per-entry change allowed when repairing a scheme with imbalance epsilon."""
    sigma = grid.sigma_sq
    live = sigma[~_zero_links(sigma)]
    if live.size == 0:
        return 0.0
    return 4.0 * float((1.0 / live).max()) * epsilon


class _Repair:
    """Balances a single-layer scheme whose imbalance has the sign pattern (+, +, -)."""

    def __init__(self, delta: np.ndarray, sigma: np.ndarray):
        self.delta = delta.copy()
        self.sigma = sigma
        self.dead = _zero_links(sigma)
        self.added = 0.0

    def imbalance(self) -> np.ndarray:
        return _imbalance((self.delta * self.sigma)[None])

    def add(self, i: int, j: int, flow: float):
        amount = flow / self.sigma[i, j]
        self.delta[i, j] += amount
        if amount > 0.0:
            self.added += amount

    def clear(self, *links: Tuple[int, int]):
        for i, j in links:
            if not self.dead[i, j]:
                self.delta[i, j] = 0.0

    def run(self):
        dead = self.dead
        d = self.imbalance()
        if not dead[2, 0] and not dead[2, 1]:
            self.add(2, 0, d[0])
            self.add(2, 1, d[1])
        elif dead[2, 1] and not dead[2, 0]:
            self._one_route_dead()
        elif dead[2, 0] and not dead[2, 1]:
            swap = [1, 0, 2]
            inner = _Repair(self.delta[np.ix_(swap, swap)], self.sigma[np.ix_(swap, swap)])
            inner._one_route_dead()
            self.delta = inner.delta[np.ix_(swap, swap)]
            self.added += inner.added
        else:
            self._node_two_isolated()

    def _one_route_dead(self):
        """Node 2 can only feed node 0."""
        if not self.dead[0, 1]:
            d = self.imbalance()
            self.add(0, 1, d[1])
            self.add(2, 0, d[0] + d[1])
        else:
            self.clear((1, 0), (1, 2))
            self.add(2, 0, self.imbalance()[0])

    def _node_two_isolated(self):
        """Node 2 has no outgoing links except its self-loop."""
        self.clear((0, 2), (1, 2))
        d1 = self.imbalance()[1]
        if not self.dead[1, 0]:
            if d1 < 0.0:
                self.add(1, 0, -d1)
            elif not self.dead[0, 1]:
                self.add(0, 1, d1)
            else:
                self.add(1, 0, -d1)
        else:
            self.clear((0, 1), (0, 2), (1, 2))


def repair_to_balanced(scheme: Union[GammaScheme, Scheme], grid: Optional[IcParameterGrid] = None) -> RepairResult:
    """Turn a single-layer scheme with imbalance epsilon into a balanced one.

    Every entry moves by at most ``repair_bound(grid, epsilon)``; links with
    zero capacity keep their delta.
    """
    if isinstance(scheme, GammaScheme):
        grid = grid or scheme.grid
        scheme = scheme.scheme
    if grid is None:
        raise DimensionMismatchError("Repair needs the parameter grid of the layer")
    if scheme.num_layers != 1:
        raise DimensionMismatchError(f"Repair works on one layer, scheme has {scheme.num_layers}")

    original = scheme.layer(0)
    sigma = grid.sigma_sq
    d = flow_imbalance(scheme, grid).imbalance
    epsilon = float(np.abs(d).sum())
    bound = repair_bound(grid, epsilon)
    if epsilon <= settings.internal_tolerance:
        return RepairResult(scheme, epsilon, bound, 0.0, 0.0)

    # reversing every link flips the sign of every imbalance
    transposed = int(np.sum(d >= 0.0)) < 2
    delta, sig = (original.T, sigma.T) if transposed else (original, sigma)
    d = -d if transposed else d

    sink = int(np.argmin(d))
    order = [k for k in range(3) if k != sink] + [sink]
    inverse = np.argsort(order)

    repair = _Repair(delta[np.ix_(order, order)], sig[np.ix_(order, order)])
    repair.run()
    repaired = repair.delta[np.ix_(inverse, inverse)]
    if transposed:
        repaired = repaired.T
    repaired = np.clip(repaired, 0.0, None) / (1.0 + repair.added)

    residual = float(np.abs(_imbalance((repaired * sigma)[None])).sum())
    if residual > 1e-9 * max(1.0, float(sigma.max())):
        raise UnrepairableZeroPatternError(
            f"Zero pattern of the grid leaves imbalance {residual:.3e} after repair",
            residual=residual,
            zero_links=[f"{i}{j}" for i, j in zip(*np.nonzero(_zero_links(sigma)))],
        )

    max_change = float(np.abs(repaired - original).max())
    logger.debug(f"repair: epsilon {epsilon:.3e}, added {repair.added:.3e}, max change {max_change:.3e}")
    return RepairResult(Scheme(repaired), epsilon, bound, max_change, repair.added)


def imbalance_rank(grid: IcParameterGrid) -> int:
    """Rank of the three balance equations (two of them suffice on a connected grid)."""
    return int(np.linalg.matrix_rank(_imbalance_rows(grid.sigma_sq)))
