"""Divergence transition matrices and their constrained top singular pair."""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag, null_space

from .config import settings
from .errors import DimensionMismatchError, InvalidPerturbationError, NumericalFailureError, ZeroProbabilitySymbolError
from .probability import (
    ChannelMatrix,
    PerturbationVector,
    ProbabilityVector,
    apply_channel,
    kl_divergence,
    perturb,
    frozen_array,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingularSolution:
    """sigma_smax and its right singular vector L* (unit norm, orthogonal to sqrt(P_X))."""
    value: float
    vector: PerturbationVector
    degenerate: bool = False

    @property
    def sigma_sq(self) -> float:
        return self.value ** 2


@dataclass(frozen=True, eq=False)
class Dtm:
    """B = diag(1/sqrt(P_Y)) W diag(sqrt(P_X))."""
    matrix: np.ndarray
    input_dist: ProbabilityVector
    output_dist: ProbabilityVector
    channel: ChannelMatrix

    @cached_property
    def deflated(self) -> np.ndarray:
        return self.matrix - np.outer(self.output_dist.sqrt, self.input_dist.sqrt)

    @cached_property
    def second(self) -> SingularSolution:
        residual = float(np.linalg.norm(self.matrix @ self.input_dist.sqrt - self.output_dist.sqrt))
        if residual > settings.input_tolerance:
            logger.warning(f"DTM top pair residual {residual:.3e} exceeds tolerance")
        value, vector, degenerate = top_singular_pair(self.deflated, (self.input_dist,))
        return SingularSolution(value, vector, degenerate)


def build_dtm(w: ChannelMatrix, p_x: ProbabilityVector) -> Dtm:
    """Build the DTM of channel ``w`` around input distribution ``p_x``."""
    if w.cols != p_x.alphabet_size:
        raise DimensionMismatchError(
            f"Channel has {w.cols} inputs, input distribution has {p_x.alphabet_size} symbols",
            cols=w.cols,
            alphabet_size=p_x.alphabet_size,
        )
    _require_full_support(p_x, "input")
    p_y = apply_channel(w, p_x)
    _require_full_support(p_y, "output")

    matrix = (w.entries / p_y.sqrt[:, None]) * p_x.sqrt[None, :]
    return Dtm(frozen_array(matrix), p_x, p_y, w)


def _require_full_support(p: ProbabilityVector, side: str):
    zeros = np.flatnonzero(p.entries <= 0.0)
    if zeros.size:
        symbol = int(zeros[0])
        raise ZeroProbabilitySymbolError(f"{side.title()} symbol {symbol} has zero probability", symbol, side)


def constraint_complement(references: Sequence[ProbabilityVector]) -> np.ndarray:
    """Orthonormal basis of {L : each block of L is orthogonal to sqrt of its reference}."""
    rows = block_diag(*[ref.sqrt[None, :] for ref in references])
    return null_space(rows)


def orient(vector: np.ndarray) -> np.ndarray:
    """Flip sign so that the first entry with |x| > 1e-12 is positive."""
    nonzero = np.flatnonzero(np.abs(vector) > 1e-12)
    if nonzero.size and vector[nonzero[0]] < 0:
        return -vector
    return vector


def top_singular_pair(
    matrix: np.ndarray,
    references: Sequence[ProbabilityVector],
) -> Tuple[float, PerturbationVector, bool]:
    """Largest singular value of ``matrix`` over unit vectors in the constraint complement.

    Returns the value, the (oriented) right singular vector and whether the
    top singular value is repeated within ``settings.degeneracy_tolerance``.
    """
    references = tuple(references)
    basis = constraint_complement(references)
    width = basis.shape[1]
    if width == 0:
        zero = np.zeros(sum(ref.alphabet_size for ref in references))
        return 0.0, PerturbationVector(frozen_array(zero), references), True

    try:
        _, values, vt = np.linalg.svd(np.asarray(matrix) @ basis)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"SVD failed: {str(e)}") from e

    spectrum = np.zeros(width)
    spectrum[: values.size] = values
    vector = orient(basis @ vt[0])
    vector = vector / np.linalg.norm(vector)
    degenerate = width > 1 and spectrum[0] - spectrum[1] < settings.degeneracy_tolerance
    if degenerate:
        logger.debug(f"Repeated top singular value {spectrum[0]:.6g}")
    return float(spectrum[0]), PerturbationVector(frozen_array(vector), references), bool(degenerate)


def second_singular(dtm: Dtm) -> SingularSolution:
    """sigma_smax(B) with L* from the deflated matrix B - sqrt(P_Y) sqrt(P_X)^T."""
    return dtm.second


def singular_spectrum(dtm: Dtm) -> np.ndarray:
    """All singular values of B in descending order (the first is 1)."""
    try:
        return np.linalg.svd(dtm.matrix, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"SVD failed: {str(e)}") from e


def _check_zero_mean(p_u: ProbabilityVector, perturbations: Sequence[PerturbationVector]):
    if len(perturbations) != p_u.alphabet_size:
        raise DimensionMismatchError(
            f"{len(perturbations)} perturbations for {p_u.alphabet_size} values of U",
            count=len(perturbations),
            alphabet_size=p_u.alphabet_size,
        )
    mean = sum(weight * l.entries for weight, l in zip(p_u.entries, perturbations))
    drift = float(np.linalg.norm(mean))
    if drift > settings.input_tolerance:
        raise InvalidPerturbationError(
            f"Perturbations shift the input marginal (weighted mean norm {drift})",
            drift=drift,
        )


def local_information_rate(
    dtm: Dtm,
    p_u: ProbabilityVector,
    perturbations: Sequence[PerturbationVector],
    epsilon: float,
) -> float:
    """1/2 eps^2 sum_u P_U(u) ||B L_u||^2, the local approximation of I(U;Y)."""
    _check_zero_mean(p_u, perturbations)
    gains = [float(np.sum((dtm.matrix @ l.entries) ** 2)) for l in perturbations]
    return 0.5 * epsilon ** 2 * float(p_u.entries @ np.array(gains))


def exact_information_rate(
    w: ChannelMatrix,
    p_x: ProbabilityVector,
    p_u: ProbabilityVector,
    perturbations: Sequence[PerturbationVector],
    epsilon: float,
) -> float:
    """I(U;Y) in nats when P_{X|U=u} = P_X + eps sqrt(P_X) L_u."""
    _check_zero_mean(p_u, perturbations)
    p_y = apply_channel(w, p_x)
    total = 0.0
    for weight, l in zip(p_u.entries, perturbations):
        if weight <= 0.0:
            continue
        conditional = apply_channel(w, perturb(p_x, l, epsilon))
        total += weight * kl_divergence(conditional, p_y)
    return total
