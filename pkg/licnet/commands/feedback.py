"""feedback: parameters, routes and sum capacity once decoded messages are fed back."""

import logging
from typing import Any, Dict, Tuple

from licnet.core.errors import CommandNotApplicableError
from licnet.core.feedback import (
    feedback_grid,
    feedback_ic_parameters,
    feedback_identical_sum_capacity,
    feedback_layered_region_params,
    feedback_network,
)
from licnet.core.multihop import identical_layer_sum_capacity, sum_capacity
from licnet.core.singlehop import IcParameterGrid

from .capacity import ic_document_sum_capacity
from .documents import BoundDocument
from .params import CommandOptions, layered_network, single_grid

logger = logging.getLogger(__name__)


def _ratio(new: float, old: float) -> Any:
    return new / old if old > 0.0 else None


def _substitution(grid: IcParameterGrid) -> Dict[str, Any]:
    fed = feedback_ic_parameters(grid, check=False)
    return {
        "sigma10_sq": fed.sigma10_fb_sq,
        "sigma20_sq": fed.sigma20_fb_sq,
        "routes": fed.routes,
        "gain": {"10": _ratio(fed.sigma10_fb_sq, grid[1, 0]), "20": _ratio(fed.sigma20_fb_sq, grid[2, 0])},
    }


def _best_link(grid: IcParameterGrid) -> Tuple[float, str]:
    entries = grid.as_dict()
    value = max(entries.values())
    return value, next(label for label in sorted(entries) if entries[label] >= value)


def run_feedback(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    if bound.kind not in ("ic", "layered"):
        raise CommandNotApplicableError(
            f"feedback needs an ic or layered document, got {bound.kind}",
            command="feedback",
            kind=bound.kind,
        )

    if bound.kind == "ic":
        # a single hop: the best link decides, with or without feedback
        grid, plain, allocation = ic_document_sum_capacity(bound)
        message = next(label for label, share in allocation.delta.items() if share > 0.0)
        fed, fed_message = _best_link(feedback_grid(grid, check=False))
        return {
            **_substitution(grid),
            "sum_capacity": plain,
            "message": message,
            "feedback_sum_capacity": fed,
            "feedback_message": fed_message,
            "improvement": _ratio(fed - plain, plain),
        }

    if not bound.identical_layers:
        net = layered_network(bound, "feedback")
        plain = sum_capacity(net)
        fed = sum_capacity(feedback_network(net))
        return {
            "layers": [_substitution(grid) for grid in net.layers],
            "region": feedback_layered_region_params(net).as_dict(),
            "sum_capacity": plain.sigma_sq,
            "path": plain.path.label(),
            "feedback_sum_capacity": fed.sigma_sq,
            "feedback_path": fed.path.label(),
            "improvement": _ratio(fed.sigma_sq - plain.sigma_sq, plain.sigma_sq),
        }

    # one grid used over and over: the eight modes decide both capacities
    grid = single_grid(bound, "feedback")
    plain = identical_layer_sum_capacity(grid, check=False)
    fed = feedback_identical_sum_capacity(grid, check=False)
    logger.debug(f"feedback: {plain.value:.12g} -> {fed.value:.12g}")
    return {
        **_substitution(grid),
        "sum_capacity": plain.value,
        "mode": plain.mode.name,
        "feedback_sum_capacity": fed.value,
        "feedback_mode": fed.mode.name,
        "improvement": _ratio(fed.value - plain.value, plain.value),
    }
