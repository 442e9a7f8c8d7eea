"""Feedback-enhanced interference layers.

With decoded messages fed back to the transmitters, the message of Tx i meant
for both receivers can also travel in two hops: privately to one receiver,
back through feedback, then as a message both transmitters know. Only the
sigma10 and sigma20 entries change; the layered feedback models (full and
per-layer) share this single substitution.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

from .errors import InvalidGridError, InvalidSymmetricParametersError
from .multihop import (
    LayeredNetwork,
    Mode,
    ModeResult,
    feedback_mode_name,
    harmonic_mean,
    identical_layer_sum_capacity,
    layered_region_params,
)
from .singlehop import IcParameterGrid, ensure_valid_grid, validate_grid

logger = logging.getLogger(__name__)


class FeedbackRoute(Enum):
    """How a common-receiver message of a single transmitter is delivered."""
    DIRECT = "direct"
    VIA_RX1 = "via_rx1"
    VIA_RX2 = "via_rx2"


# (first hop, second hop) of every two-hop route, per message
ROUTE_LINKS: Dict[str, Dict[FeedbackRoute, Tuple[Tuple[int, int], Tuple[int, int]]]] = {
    "10": {
        FeedbackRoute.VIA_RX2: ((1, 2), (0, 1)),
        FeedbackRoute.VIA_RX1: ((1, 1), (0, 2)),
    },
    "20": {
        FeedbackRoute.VIA_RX1: ((2, 1), (0, 2)),
        FeedbackRoute.VIA_RX2: ((2, 2), (0, 1)),
    },
}


@dataclass(frozen=True)
class FeedbackGrid:
    base: IcParameterGrid
    sigma10_fb_sq: float
    sigma20_fb_sq: float
    route10: FeedbackRoute
    route20: FeedbackRoute

    @property
    def grid(self) -> IcParameterGrid:
        """Base grid with sigma10 and sigma20 replaced by their feedback values."""
        sigma = self.base.sigma_sq.copy()
        sigma[1, 0] = self.sigma10_fb_sq
        sigma[2, 0] = self.sigma20_fb_sq
        return IcParameterGrid(sigma)

    @property
    def routes(self) -> Dict[str, str]:
        return {"10": self.route10.value, "20": self.route20.value}


@dataclass(frozen=True)
class Corollary2Report:
    """Sum capacity of a symmetric grid with and without feedback."""
    sum_capacity: float
    feedback_sum_capacity: float
    mode: str
    feedback_mode: str
    closed_form: float
    holds: bool


def _best_route(g: IcParameterGrid, message: str) -> Tuple[float, FeedbackRoute]:
    i = int(message[0])
    value, route = g[i, 0], FeedbackRoute.DIRECT
    for candidate, (first, second) in ROUTE_LINKS[message].items():
        relayed = harmonic_mean([g[first], g[second]]) / 2.0
        if relayed > value:
            value, route = relayed, candidate
    return value, route


def feedback_ic_parameters(g: IcParameterGrid, check: bool = True) -> FeedbackGrid:
    """Feedback values of sigma10 and sigma20 with the route attaining each."""
    if check:
        ensure_valid_grid(g)
    sigma10, route10 = _best_route(g, "10")
    sigma20, route20 = _best_route(g, "20")
    logger.debug(f"feedback: sigma10 {sigma10:.12g} ({route10.value}), sigma20 {sigma20:.12g} ({route20.value})")
    return FeedbackGrid(g, sigma10, sigma20, route10, route20)


def feedback_grid(g: IcParameterGrid, check: bool = True) -> IcParameterGrid:
    return feedback_ic_parameters(g, check).grid


def feedback_network(net: LayeredNetwork) -> LayeredNetwork:
    # substituted grids need not satisfy the no-feedback chains
    return LayeredNetwork(tuple(feedback_grid(layer, check=False) for layer in net.layers), check=False)


def feedback_layered_region_params(net: LayeredNetwork) -> IcParameterGrid:
    return layered_region_params(feedback_network(net))


def feedback_identical_sum_capacity(g: IcParameterGrid, check: bool = True) -> ModeResult:
    """Best of the eight modes after the feedback substitution."""
    if check:
        ensure_valid_grid(g)
    result = identical_layer_sum_capacity(feedback_grid(g, check=False), check=False)
    return ModeResult(result.value, Mode(feedback_mode_name(result.mode), result.mode.cycle))


def symmetric_grid(lambda_sq: float, mu_sq: float, sigma_sq: float, sigma00_sq: float) -> IcParameterGrid:
    return IcParameterGrid([
        [sigma00_sq, sigma_sq, sigma_sq],
        [mu_sq, lambda_sq, lambda_sq],
        [mu_sq, lambda_sq, lambda_sq],
    ])


def corollary2_check(lambda_sq: float, mu_sq: float, sigma_sq: float, sigma00_sq: float) -> Corollary2Report:
    """Compare feedback and plain sum capacity of a symmetric grid."""
    try:
        grid = symmetric_grid(lambda_sq, mu_sq, sigma_sq, sigma00_sq)
    except InvalidGridError as e:
        raise InvalidSymmetricParametersError(e.detail) from e
    violations = validate_grid(grid)
    if violations:
        raise InvalidSymmetricParametersError(
            f"Symmetric parameters violate {violations[0].message}",
            violations=[v.chain for v in violations],
        )

    plain = identical_layer_sum_capacity(grid)
    fed = feedback_identical_sum_capacity(grid)
    closed = max(
        lambda_sq,
        sigma00_sq,
        harmonic_mean([mu_sq, sigma_sq]),
        harmonic_mean([mu_sq, lambda_sq, sigma_sq]),
    )
    holds = abs(plain.value - fed.value) <= 1e-10 and abs(plain.value - closed) <= 1e-10
    if not holds:
        logger.warning(f"Symmetric grid gains from feedback: {plain.value:.12g} vs {fed.value:.12g}")
    return Corollary2Report(plain.value, fed.value, plain.mode.name, fed.mode.name, closed, holds)

