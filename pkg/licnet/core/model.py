"""Bit-pipe deterministic models of single-hop channels.

A channel is abstracted as parallel links, one per message label, each with
capacity delta * sigma_sq; the deltas share a budget (1 for a single hop, L
for an L-layer network).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .config import settings
from .errors import DimensionMismatchError, InvalidGridError, InvalidWeightError
from .lp import LpProblem, solve_lp
from .singlehop import BcParameters, IcParameterGrid, MacParameters, ensure_valid_grid

logger = logging.getLogger(__name__)

Parameters = Union[BcParameters, MacParameters, IcParameterGrid, Mapping[str, float], float]


@dataclass(frozen=True)
class RateTuple:
    rates: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        negative = [label for label, rate in self.rates.items() if rate < 0.0]
        if negative:
            raise InvalidWeightError(f"Rate for message {negative[0]} is negative", label=negative[0])


@dataclass(frozen=True)
class Allocation:
    delta: Dict[str, float]
    budget: float = 1.0

    def __post_init__(self):
        if self.total > self.budget + 1e-9:
            raise InvalidWeightError(
                f"Allocation uses {self.total:.12g} of a budget of {self.budget:.12g}",
                total=self.total,
                budget=self.budget,
            )

    @property
    def total(self) -> float:
        return float(sum(self.delta.values()))


def rate_parameters(parameters: Parameters) -> Dict[str, float]:
    """Normalize any parameter object to an ordered label -> sigma_sq map."""
    if isinstance(parameters, (BcParameters, MacParameters)):
        return {"0": parameters.sigma0_sq, "1": parameters.sigma1_sq, "2": parameters.sigma2_sq}
    if isinstance(parameters, IcParameterGrid):
        return parameters.as_dict()
    if isinstance(parameters, Mapping):
        return {str(label): float(parameters[label]) for label in sorted(parameters)}
    if isinstance(parameters, (int, float, np.floating)):
        return {"u": float(parameters)}
    raise DimensionMismatchError(f"Unsupported parameter object {type(parameters).__name__}")


def mu_sum_rate(
    parameters: Parameters,
    mu: Optional[Mapping[str, float]] = None,
    budget: float = 1.0,
) -> Tuple[float, Allocation]:
    """max sum_k mu_k delta_k sigma_k^2  s.t.  sum_k delta_k <= budget."""
    sigma = rate_parameters(parameters)
    labels = sorted(sigma)
    weights = {label: 1.0 for label in labels} if mu is None else dict(mu)

    unknown = sorted(set(weights) - set(labels))
    if unknown:
        raise DimensionMismatchError(f"Weight given for unknown message {unknown[0]}", labels=labels)
    if any(value < 0.0 for value in weights.values()):
        raise InvalidWeightError("Message weights must be non-negative", weights=weights)
    if budget < 0.0:
        raise InvalidWeightError(f"Budget {budget} is negative", budget=budget)

    objective = np.array([weights.get(label, 0.0) * sigma[label] for label in labels])
    problem = LpProblem(
        objective=objective,
        a_ub=np.ones((1, len(labels))),
        b_ub=np.array([budget]),
        labels=labels,
    )
    solution = solve_lp(problem)
    logger.debug(f"mu-sum-rate over {labels}: {solution.value:.12g}")
    return solution.value, Allocation(solution.as_dict(), budget)


def ic_sum_capacity(g: IcParameterGrid, tolerance: Optional[float] = None) -> Tuple[float, Allocation]:
    """Best single link of a valid grid; always one of the common-receiver entries."""
    ensure_valid_grid(g, tolerance)
    entries = g.as_dict()
    value = max(entries.values())
    label = next(k for k in sorted(entries) if entries[k] >= value - settings.internal_tolerance)

    beamforming = max(g[0, 1], g[0, 2])
    if abs(value - beamforming) > (settings.grid_tolerance if tolerance is None else tolerance):
        raise InvalidGridError(
            f"Largest entry {value:.12g} differs from max(sigma01, sigma02) = {beamforming:.12g}",
            violations=["sigma01", "sigma02"],
        )
    delta = {k: (1.0 if k == label else 0.0) for k in sorted(entries)}
    return value, Allocation(delta, 1.0)


def rate_region_vertices(parameters: Parameters, budget: float = 1.0) -> List[RateTuple]:
    """Origin plus the endpoint budget * sigma_sq of each message axis.

    The region is the convex hull of these points, closed under coordinate-wise
    decrease.
    """
    sigma = rate_parameters(parameters)
    labels = sorted(sigma)
    vertices = [RateTuple({label: 0.0 for label in labels})]
    for label in labels:
        vertices.append(RateTuple({k: (budget * sigma[k] if k == label else 0.0) for k in labels}))
    return vertices


def region_contains(
    parameters: Parameters,
    rates: Union[RateTuple, Mapping[str, float]],
    budget: float = 1.0,
    tolerance: float = 1e-9,
) -> bool:
    """Whether some allocation with sum(delta) <= budget supports ``rates``."""
    sigma = rate_parameters(parameters)
    values = rates.rates if isinstance(rates, RateTuple) else dict(rates)
    unknown = sorted(set(values) - set(sigma))
    if unknown:
        raise DimensionMismatchError(f"Rate given for unknown message {unknown[0]}", labels=sorted(sigma))

    needed = 0.0
    for label, rate in values.items():
        if rate <= tolerance:
            continue
        if sigma[label] <= 0.0:
            return False
        needed += rate / sigma[label]
    return needed <= budget + tolerance
