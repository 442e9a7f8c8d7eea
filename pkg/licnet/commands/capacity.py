"""region, sumcap, allocate and modes."""

import logging
from typing import Any, Dict, Tuple

import numpy as np

from licnet.core.config import settings
from licnet.core.feedback import feedback_grid
from licnet.core.model import Allocation, ic_sum_capacity, mu_sum_rate, rate_parameters, rate_region_vertices
from licnet.core.multihop import (
    MODES,
    Scheme,
    feedback_mode_name,
    identical_layer_sum_capacity,
    layered_region_params,
    mode_allocation,
    mode_values,
    path_allocation,
    sum_capacity,
)
from licnet.core.schemes import LABELS, throughput
from licnet.core.singlehop import IcParameterGrid, bc_parameters, mac_parameters, p2p_parameter

from .documents import BoundDocument
from .params import CommandOptions, ic_report, layer_grids, layered_network, single_grid

logger = logging.getLogger(__name__)


def _single_hop_parameters(bound: BoundDocument):
    structure = bound.structure
    if bound.kind == "p2p":
        return p2p_parameter(bound.channels[structure["w"]], bound.input_dists[structure["p"]])[0]
    if bound.kind == "bc":
        return bc_parameters(
            bound.channels[structure["w1"]],
            bound.channels[structure["w2"]],
            bound.input_dists[structure["p"]],
        )
    if bound.kind == "mac":
        return mac_parameters(
            bound.channels[structure["w"]],
            bound.input_dists[structure["p1"]],
            bound.input_dists[structure["p2"]],
        )
    return ic_report(bound, structure).grid


def run_region(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    """Axis vertices of the rate region; the region is their hull, closed under decrease."""
    if bound.kind == "layered":
        parameters = layered_region_params(layered_network(bound, "region"))
    else:
        parameters = _single_hop_parameters(bound)
    sigma = rate_parameters(parameters)
    vertices = rate_region_vertices(parameters)
    return {
        "labels": sorted(sigma),
        "sigma_sq": sigma,
        "vertices": [vertex.rates for vertex in vertices],
    }


def ic_document_sum_capacity(bound: BoundDocument) -> Tuple[IcParameterGrid, float, Allocation]:
    """Grid of an ic document and its single-hop sum capacity, with the solver gaps as slack."""
    report = ic_report(bound, bound.structure)
    slack = max(report.gaps.values(), default=0.0)
    value, allocation = ic_sum_capacity(report.grid, settings.grid_tolerance + slack)
    return report.grid, value, allocation


def _identical_layers(bound: BoundDocument) -> Tuple[float, str, Scheme]:
    grid = layer_grids(bound)[0]
    best = identical_layer_sum_capacity(grid, check=False)
    scheme = mode_allocation(grid, best.mode) if best.value > 0.0 else Scheme(np.zeros((3, 3)))
    return best.value, best.mode.name, scheme


def run_sumcap(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    kind = bound.kind
    if kind == "layered" and bound.identical_layers:
        value, mode, scheme = _identical_layers(bound)
        return {"sum_capacity": value, "mode": mode, "allocation": scheme.layer(0).tolist()}

    if kind == "layered":
        net = layered_network(bound, "sumcap")
        result = sum_capacity(net)
        scheme = path_allocation(net, result.path)
        return {
            "sum_capacity": result.sigma_sq,
            "path": result.path.label(),
            "dead": result.path.dead,
            "allocation": scheme.tolist(),
        }

    if kind == "ic":
        value, allocation = ic_document_sum_capacity(bound)[1:]
        message = next(label for label, share in allocation.delta.items() if share > 0.0)
        return {"sum_capacity": value, "message": message, "allocation": allocation.delta}

    value, allocation = mu_sum_rate(_single_hop_parameters(bound))
    return {"sum_capacity": value, "allocation": allocation.delta}


def run_allocate(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    """The full scheme achieving the sum capacity, with its per-layer total and throughput."""
    kind = bound.kind
    if kind in ("p2p", "bc", "mac"):
        value, allocation = mu_sum_rate(_single_hop_parameters(bound))
        return {"allocation": allocation.delta, "total": allocation.total, "throughput": value}

    if kind == "ic":
        grid, _, allocation = ic_document_sum_capacity(bound)
        scheme = Scheme(np.array([allocation.delta[label] for label in LABELS]).reshape(3, 3))
    elif bound.identical_layers:
        grid = layer_grids(bound)[0]
        scheme = _identical_layers(bound)[2]
    else:
        net = layered_network(bound, "allocate")
        scheme = path_allocation(net, sum_capacity(net).path)
        return {
            "scheme": scheme.tolist(),
            "total": scheme.normalized_total,
            "throughput": throughput(scheme, net),
        }
    return {
        "scheme": scheme.tolist(),
        "total": scheme.normalized_total,
        "throughput": throughput(scheme, grid),
    }


def run_modes(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    """All eight repeated-cycle modes of a grid and the best one."""
    grid = single_grid(bound, "modes")
    values = mode_values(grid)
    best = identical_layer_sum_capacity(grid, check=False)
    result: Dict[str, Any] = {"modes": values, "best": {"mode": best.mode.name, "value": best.value}}
    if bound.feedback:
        fed = mode_values(feedback_grid(grid, check=False))
        result["feedback_modes"] = {feedback_mode_name(mode): fed[mode.name] for mode in MODES}
    logger.debug(f"modes: best {best.mode.name} = {best.value:.12g}")
    return result
