"""params: channel parameters of a document, and the grid helpers every command shares."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from licnet.core.config import settings
from licnet.core.errors import CommandNotApplicableError
from licnet.core.feedback import feedback_ic_parameters
from licnet.core.multihop import LayeredNetwork, best_path
from licnet.core.probability import ChannelMatrix, ProbabilityVector
from licnet.core.singlehop import (
    NODES,
    IcParameterGrid,
    IcParameterReport,
    bc_parameters,
    ensure_valid_grid,
    ic_marginals,
    ic_parameter_report,
    mac_parameters,
    p2p_parameter,
)

from .documents import BoundDocument

logger = logging.getLogger(__name__)


@dataclass
class CommandOptions:
    alpha: Optional[float] = None
    certificates: bool = False


def ic_inputs(
    bound: BoundDocument,
    structure: Dict[str, str],
) -> Tuple[ChannelMatrix, ChannelMatrix, ChannelMatrix, ChannelMatrix, ProbabilityVector, ProbabilityVector]:
    """(W11, W12, W21, W22, P1, P2) from either wiring form."""
    p1, p2 = bound.input_dists[structure["p1"]], bound.input_dists[structure["p2"]]
    if "y1" in structure:
        marginals = ic_marginals(bound.channels[structure["y1"]], bound.channels[structure["y2"]], p1, p2)
    else:
        marginals = tuple(bound.channels[structure[key]] for key in ("w11", "w12", "w21", "w22"))
    return (*marginals, p1, p2)


def ic_report(bound: BoundDocument, structure: Dict[str, str]) -> IcParameterReport:
    """Grid of an interference wiring, validated up to the min-max gaps behind it."""
    report = ic_parameter_report(*ic_inputs(bound, structure))
    # a min-max entry may undershoot its true value by at most its gap
    slack = max(report.gaps.values(), default=0.0)
    ensure_valid_grid(report.grid, settings.grid_tolerance + slack)
    return report


def layer_reports(bound: BoundDocument) -> List[Optional[IcParameterReport]]:
    """Per layer: the report behind a wired layer, None for an inline grid."""
    cache: Dict[Tuple[Tuple[str, str], ...], IcParameterReport] = {}
    reports: List[Optional[IcParameterReport]] = []
    for layer in bound.layers:
        if isinstance(layer, IcParameterGrid):
            reports.append(None)
            continue
        key = tuple(sorted(layer.items()))
        if key not in cache:
            cache[key] = ic_report(bound, layer)
        reports.append(cache[key])
    return reports


def layer_grids(bound: BoundDocument) -> List[IcParameterGrid]:
    return [
        layer if report is None else report.grid
        for layer, report in zip(bound.layers, layer_reports(bound))
    ]


def layered_network(bound: BoundDocument, command: str) -> LayeredNetwork:
    if bound.kind != "layered":
        raise CommandNotApplicableError(f"{command} needs a layered document, got {bound.kind}", command=command, kind=bound.kind)
    if bound.identical_layers:
        raise CommandNotApplicableError(
            f"{command} needs a finite layered network; identical_layers repeats indefinitely",
            command=command,
        )
    # every grid was validated when bound or computed
    return LayeredNetwork(tuple(layer_grids(bound)), check=False)


def single_grid(bound: BoundDocument, command: str) -> IcParameterGrid:
    """The one grid an ic document, or a single-layer layered document, describes."""
    if bound.kind == "ic":
        return ic_report(bound, bound.structure).grid
    if bound.kind == "layered" and len(bound.layers) == 1:
        return layer_grids(bound)[0]
    raise CommandNotApplicableError(
        f"{command} needs a single interference grid (ic, or layered with one layer)",
        command=command,
        kind=bound.kind,
    )


def _vectors(report: IcParameterReport) -> Dict[str, Any]:
    return {
        "vectors": {label: vector.tolist() for label, vector in report.vectors.items()},
        "gaps": dict(report.gaps),
        "dual_bounds": dict(report.dual_bounds),
    }


def _feedback_values(grid: IcParameterGrid) -> Dict[str, Any]:
    fed = feedback_ic_parameters(grid, check=False)
    return {"sigma10_sq": fed.sigma10_fb_sq, "sigma20_sq": fed.sigma20_fb_sq, "routes": fed.routes}


def run_params(bound: BoundDocument, options: CommandOptions) -> Dict[str, Any]:
    kind = bound.kind
    structure = bound.structure
    if kind == "p2p":
        sigma_sq, solution = p2p_parameter(bound.channels[structure["w"]], bound.input_dists[structure["p"]])
        values: Dict[str, Any] = {"sigma_sq": sigma_sq, "sigma": solution.value}
        if options.certificates:
            values["certificates"] = {"vector": solution.vector.tolist(), "degenerate": solution.degenerate}
        return values

    if kind == "bc":
        params = bc_parameters(
            bound.channels[structure["w1"]],
            bound.channels[structure["w2"]],
            bound.input_dists[structure["p"]],
        )
        values = {"sigma_sq": {"1": params.sigma1_sq, "2": params.sigma2_sq, "0": params.sigma0_sq}}
        if options.certificates:
            values["certificates"] = {
                "vectors": {"1": params.l1.tolist(), "2": params.l2.tolist(), "0": params.l0.tolist()},
                "dual_bound": params.dual_bound,
                "gap": params.gap,
            }
        return values

    if kind == "mac":
        params = mac_parameters(
            bound.channels[structure["w"]],
            bound.input_dists[structure["p1"]],
            bound.input_dists[structure["p2"]],
        )
        values = {"sigma_sq": {"1": params.sigma1_sq, "2": params.sigma2_sq, "0": params.sigma0_sq}}
        if options.certificates:
            values["certificates"] = {
                "vectors": {"1": params.l1.tolist(), "2": params.l2.tolist(), "0": params.l0.tolist()},
                "degenerate": params.degenerate,
            }
        return values

    if kind == "ic":
        report = ic_report(bound, structure)
        values = {"sigma_sq": report.grid.as_dict()}
        if bound.feedback:
            values["feedback"] = _feedback_values(report.grid)
        if options.certificates:
            values["certificates"] = _vectors(report)
        return values

    reports = layer_reports(bound)
    grids = layer_grids(bound)
    values = {"layers": [grid.as_dict() for grid in grids]}
    if bound.feedback:
        values["feedback"] = [_feedback_values(grid) for grid in grids]
    if options.certificates:
        values["certificates"] = [None if report is None else _vectors(report) for report in reports]
    if not bound.identical_layers:
        net = LayeredNetwork(tuple(grids), check=False)
        region: Dict[str, float] = {}
        paths: Dict[str, str] = {}
        for i in NODES:
            for j in NODES:
                result = best_path(net, i, j)
                region[f"{i}{j}"] = result.sigma_sq
                paths[f"{i}{j}"] = result.path.label()
        values["region"] = region
        values["paths"] = paths
    logger.debug(f"params: {len(grids)} layer(s)")
    return values
