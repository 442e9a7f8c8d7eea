"""repair: balance the single-layer scheme a document carries."""

import logging
from typing import Any, Dict

from licnet.core.errors import DocumentValidationError
from licnet.core.schemes import (
    flow_balance_capacity,
    flow_imbalance,
    gamma_capacity,
    repair_bound,
    repair_to_balanced,
    throughput,
)

from .documents import BoundDocument
from .params import CommandOptions, single_grid

logger = logging.getLogger(__name__)


def run_repair(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    if bound.scheme is None:
        raise DocumentValidationError("scheme: repair needs a 3x3 scheme in the document", field="scheme")
    grid = single_grid(bound, "repair")
    scheme = bound.scheme

    result = repair_to_balanced(scheme, grid)
    epsilon = result.epsilon
    balanced, _ = flow_balance_capacity(grid)
    relaxed, _ = gamma_capacity(grid, epsilon)
    before, after = throughput(scheme, grid), throughput(result.scheme, grid)
    loss_bound = repair_bound(grid, epsilon) * float(grid.sigma_sq.sum())

    values = {
        "epsilon": epsilon,
        "scheme": result.scheme.layer(0).tolist(),
        "gamma": flow_imbalance(result.scheme, grid).gamma,
        "max_change": result.max_change,
        "change_bound": result.bound,
        "added": result.added,
        "throughput": {"before": before, "after": after, "loss_bound": loss_bound},
        # balanced capacity <= gamma capacity <= balanced capacity + loss bound
        "capacity": {"balanced": balanced, "gamma": relaxed, "upper": balanced + loss_bound},
    }
    logger.debug(f"repair: epsilon {epsilon:.3e}, throughput {before:.12g} -> {after:.12g}")
    return values
