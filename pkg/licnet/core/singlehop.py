"""Channel parameters of single-hop networks.

Point-to-point, broadcast, multiple-access and interference channels are all
reduced to squared constrained singular values (``sigma_sq``) of their DTMs.
Common-message entries come from either a stacked singular value (several
transmitters share the message) or a max-min program (several receivers
decode it).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .dtm import (
    Dtm,
    SingularSolution,
    build_dtm,
    constraint_complement,
    orient,
    second_singular,
    top_singular_pair,
)
from .errors import DimensionMismatchError, InvalidGridError
from .minmax import MinMaxSolution, solve_minmax
from .probability import ChannelMatrix, PerturbationVector, ProbabilityVector, frozen_array

logger = logging.getLogger(__name__)

NODES = (0, 1, 2)
SWAP_USERS = [0, 2, 1]


@dataclass(frozen=True)
class BcParameters:
    """Private (sigma1, sigma2) and common (sigma0) parameters of a two-receiver broadcast channel."""
    sigma1_sq: float
    sigma2_sq: float
    sigma0_sq: float
    l1: PerturbationVector
    l2: PerturbationVector
    l0: PerturbationVector
    dual_bound: float = 0.0
    gap: float = 0.0


@dataclass(frozen=True)
class MacParameters:
    """Private and common parameters of a two-transmitter multiple-access channel.

    ``l0`` is stacked: the first |X1| entries drive transmitter 1, the rest
    transmitter 2.
    """
    sigma1_sq: float
    sigma2_sq: float
    sigma0_sq: float
    l1: PerturbationVector
    l2: PerturbationVector
    l0: PerturbationVector
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class IcParameterGrid:
    """sigma_sq[i][j] for virtual transmitter i and virtual receiver j (0 means common)."""
    sigma_sq: np.ndarray

    def __post_init__(self):
        array = np.asarray(self.sigma_sq, dtype=float)
        if array.shape != (3, 3):
            raise DimensionMismatchError(f"Parameter grid must be 3x3, got {array.shape}", shape=list(array.shape))
        if not np.all(np.isfinite(array)) or np.any(array < 0.0):
            raise InvalidGridError("Parameter grid entries must be finite and non-negative", entries=array.tolist())
        object.__setattr__(self, "sigma_sq", frozen_array(array))

    @classmethod
    def from_entries(cls, entries: Dict[str, float]) -> "IcParameterGrid":
        grid = np.zeros((3, 3))
        for key, value in entries.items():
            i, j = int(key[0]), int(key[1])
            grid[i, j] = value
        return cls(grid)

    def __getitem__(self, index: Tuple[int, int]) -> float:
        return float(self.sigma_sq[index])

    @staticmethod
    def label(i: int, j: int) -> str:
        return f"{i}{j}"

    def as_dict(self) -> Dict[str, float]:
        return {self.label(i, j): self[i, j] for i in NODES for j in NODES}

    def swap_users(self) -> "IcParameterGrid":
        """Relabel users 1 and 2 on both sides."""
        return IcParameterGrid(self.sigma_sq[np.ix_(SWAP_USERS, SWAP_USERS)])

    def tolist(self):
        return self.sigma_sq.tolist()


@dataclass(frozen=True)
class GridViolation:
    chain: str
    lower: float
    value: float
    upper: float
    message: str


@dataclass(frozen=True)
class IcParameterReport:
    """Grid plus, per entry, the certificate vector and the min-max duality gap (0 for SVD entries)."""
    grid: IcParameterGrid
    vectors: Dict[str, PerturbationVector] = field(default_factory=dict)
    gaps: Dict[str, float] = field(default_factory=dict)
    dual_bounds: Dict[str, float] = field(default_factory=dict)


def p2p_parameter(w: ChannelMatrix, p_x: ProbabilityVector) -> Tuple[float, SingularSolution]:
    solution = second_singular(build_dtm(w, p_x))
    return solution.sigma_sq, solution


def time_share_rate(sigma1_sq: float, sigma2_sq: float) -> float:
    """Largest common rate reachable by time-sharing two private links."""
    total = sigma1_sq + sigma2_sq
    if total <= 0.0:
        return 0.0
    return sigma1_sq * sigma2_sq / total


def _gram(dtm: Dtm) -> np.ndarray:
    return dtm.deflated.T @ dtm.deflated


def _common_receivers(grams: Sequence[np.ndarray], references: Sequence[ProbabilityVector]) -> MinMaxSolution:
    """max over unit L in the constraint complement of min_k ||B_k L||^2."""
    return solve_minmax(grams[0], grams[1], constraint_complement(references))


def bc_parameters(w1: ChannelMatrix, w2: ChannelMatrix, p_x: ProbabilityVector) -> BcParameters:
    if w1.cols != w2.cols:
        raise DimensionMismatchError(
            f"Broadcast branches disagree on the input alphabet ({w1.cols} vs {w2.cols})",
            cols=[w1.cols, w2.cols],
        )
    d1, d2 = build_dtm(w1, p_x), build_dtm(w2, p_x)
    s1, s2 = second_singular(d1), second_singular(d2)
    common = _common_receivers([_gram(d1), _gram(d2)], [p_x])
    l0 = PerturbationVector(frozen_array(orient(common.vector)), (p_x,))

    params = BcParameters(
        sigma1_sq=s1.sigma_sq,
        sigma2_sq=s2.sigma_sq,
        sigma0_sq=common.value,
        l1=s1.vector,
        l2=s2.vector,
        l0=l0,
        dual_bound=common.dual_bound,
        gap=common.gap,
    )
    lower = time_share_rate(params.sigma1_sq, params.sigma2_sq)
    upper = min(params.sigma1_sq, params.sigma2_sq)
    tol = settings.grid_tolerance
    if not lower - tol <= params.sigma0_sq <= upper + tol:
        logger.warning(f"Broadcast common parameter {params.sigma0_sq:.12g} outside [{lower:.12g}, {upper:.12g}]")
    return params


def marginal_channels(
    w: ChannelMatrix,
    p1: ProbabilityVector,
    p2: ProbabilityVector,
) -> Tuple[ChannelMatrix, ChannelMatrix]:
    """Average a joint channel W(y|x1 x2) over the other input.

    Columns of ``w`` are ordered x1-major: column = x1 * |X2| + x2.
    """
    n1, n2 = p1.alphabet_size, p2.alphabet_size
    if w.cols != n1 * n2:
        raise DimensionMismatchError(
            f"Joint channel has {w.cols} columns, inputs need {n1} x {n2}",
            cols=w.cols,
            expected=n1 * n2,
        )
    joint = w.entries.reshape(w.rows, n1, n2)
    first = np.einsum("yab,b->ya", joint, p2.entries)
    second = np.einsum("yab,a->yb", joint, p1.entries)
    return ChannelMatrix(frozen_array(first)), ChannelMatrix(frozen_array(second))


def _stacked_common(d1: Dtm, d2: Dtm) -> Tuple[float, PerturbationVector, bool]:
    """Both transmitters know the message: top singular pair of [B1 B2] with block constraints."""
    stacked = np.hstack([d1.deflated, d2.deflated])
    value, vector, degenerate = top_singular_pair(stacked, (d1.input_dist, d2.input_dist))
    return value ** 2, vector, degenerate


def mac_parameters(w: ChannelMatrix, p1: ProbabilityVector, p2: ProbabilityVector) -> MacParameters:
    w1, w2 = marginal_channels(w, p1, p2)
    d1, d2 = build_dtm(w1, p1), build_dtm(w2, p2)
    s1, s2 = second_singular(d1), second_singular(d2)
    sigma0_sq, l0, degenerate = _stacked_common(d1, d2)

    tol = settings.grid_tolerance
    lower, upper = max(s1.sigma_sq, s2.sigma_sq), s1.sigma_sq + s2.sigma_sq
    if not lower - tol <= sigma0_sq <= upper + tol:
        logger.warning(f"MAC common parameter {sigma0_sq:.12g} outside [{lower:.12g}, {upper:.12g}]")

    return MacParameters(
        sigma1_sq=s1.sigma_sq,
        sigma2_sq=s2.sigma_sq,
        sigma0_sq=sigma0_sq,
        l1=s1.vector,
        l2=s2.vector,
        l0=l0,
        degenerate=degenerate,
    )


def ic_marginals(
    y1_joint: ChannelMatrix,
    y2_joint: ChannelMatrix,
    p1: ProbabilityVector,
    p2: ProbabilityVector,
) -> Tuple[ChannelMatrix, ChannelMatrix, ChannelMatrix, ChannelMatrix]:
    """(W11, W12, W21, W22) from the joint channels seen at each receiver."""
    w11, w21 = marginal_channels(y1_joint, p1, p2)
    w12, w22 = marginal_channels(y2_joint, p1, p2)
    return w11, w12, w21, w22


def ic_parameter_report(
    w11: ChannelMatrix,
    w12: ChannelMatrix,
    w21: ChannelMatrix,
    w22: ChannelMatrix,
    p1: ProbabilityVector,
    p2: ProbabilityVector,
) -> IcParameterReport:
    """Fill the 3x3 grid and keep the certificate behind each entry."""
    inputs = {1: p1, 2: p2}
    dtms = {
        (1, 1): build_dtm(w11, p1),
        (1, 2): build_dtm(w12, p1),
        (2, 1): build_dtm(w21, p2),
        (2, 2): build_dtm(w22, p2),
    }
    grid = np.zeros((3, 3))
    vectors: Dict[str, PerturbationVector] = {}
    gaps: Dict[str, float] = {}
    bounds: Dict[str, float] = {}

    for (i, j), dtm in dtms.items():
        solution = second_singular(dtm)
        grid[i, j] = solution.sigma_sq
        vectors[f"{i}{j}"] = solution.vector
        gaps[f"{i}{j}"] = 0.0

    # private message of Tx i decoded by both receivers
    for i in (1, 2):
        common = _common_receivers([_gram(dtms[i, 1]), _gram(dtms[i, 2])], [inputs[i]])
        grid[i, 0] = common.value
        vectors[f"{i}0"] = PerturbationVector(frozen_array(orient(common.vector)), (inputs[i],))
        gaps[f"{i}0"] = common.gap
        bounds[f"{i}0"] = common.dual_bound

    # message known to both transmitters, decoded at Rx j
    for j in (1, 2):
        value, vector, _ = _stacked_common(dtms[1, j], dtms[2, j])
        grid[0, j] = value
        vectors[f"0{j}"] = vector
        gaps[f"0{j}"] = 0.0

    stacked = [np.hstack([dtms[1, j].deflated, dtms[2, j].deflated]) for j in (1, 2)]
    common = _common_receivers([m.T @ m for m in stacked], [p1, p2])
    grid[0, 0] = common.value
    vectors["00"] = PerturbationVector(frozen_array(orient(common.vector)), (p1, p2))
    gaps["00"] = common.gap
    bounds["00"] = common.dual_bound

    logger.debug(f"IC grid: {grid.tolist()}")
    return IcParameterReport(IcParameterGrid(grid), vectors, gaps, bounds)


def ic_parameters(
    w11: ChannelMatrix,
    w12: ChannelMatrix,
    w21: ChannelMatrix,
    w22: ChannelMatrix,
    p1: ProbabilityVector,
    p2: ProbabilityVector,
) -> IcParameterGrid:
    return ic_parameter_report(w11, w12, w21, w22, p1, p2).grid


def _chain(name: str, lower: float, value: float, upper: float, tol: float) -> Optional[GridViolation]:
    if lower - tol <= value <= upper + tol:
        return None
    return GridViolation(
        chain=name,
        lower=lower,
        value=value,
        upper=upper,
        message=f"{name} = {value:.12g} is outside [{lower:.12g}, {upper:.12g}]",
    )


def validate_grid(g: IcParameterGrid, tolerance: Optional[float] = None) -> List[GridViolation]:
    """Check the five structural chains every interference grid satisfies."""
    tol = settings.grid_tolerance if tolerance is None else tolerance
    s = g.sigma_sq
    checks = [
        _chain("sigma10", time_share_rate(s[1, 1], s[1, 2]), s[1, 0], min(s[1, 1], s[1, 2]), tol),
        _chain("sigma20", time_share_rate(s[2, 1], s[2, 2]), s[2, 0], min(s[2, 1], s[2, 2]), tol),
        _chain("sigma00", time_share_rate(s[0, 1], s[0, 2]), s[0, 0], min(s[0, 1], s[0, 2]), tol),
        _chain("sigma01", max(s[1, 1], s[2, 1]), s[0, 1], s[1, 1] + s[2, 1], tol),
        _chain("sigma02", max(s[1, 2], s[2, 2]), s[0, 2], s[1, 2] + s[2, 2], tol),
    ]
    return [violation for violation in checks if violation is not None]


def ensure_valid_grid(g: IcParameterGrid, tolerance: Optional[float] = None) -> IcParameterGrid:
    violations = validate_grid(g, tolerance)
    if violations:
        raise InvalidGridError(
            f"Parameter grid violates {len(violations)} chain(s): {violations[0].message}",
            violations=[v.chain for v in violations],
            messages=[v.message for v in violations],
        )
    return g
