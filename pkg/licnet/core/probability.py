"""Distributions, channels and perturbation vectors.

All objects here are immutable once built: the backing numpy arrays are
flagged read-only, so instances can be shared freely between threads.
Inputs are checked against ``settings.input_tolerance`` and then
renormalized, which keeps the 1e-12 invariants of constructed objects.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from .config import settings
from .errors import (
    DimensionMismatchError,
    InvalidPerturbationError,
    NegativeEntryError,
    SumNotOneError,
    SupportMismatchError,
)

logger = logging.getLogger(__name__)


def frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Finite distribution over an alphabet (P_X, P_Y, P_{X|U=u})."""
    entries: np.ndarray

    @property
    def alphabet_size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def sqrt(self) -> np.ndarray:
        return np.sqrt(self.entries)

    @property
    def has_full_support(self) -> bool:
        return bool(np.all(self.entries > 0.0))

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Column-stochastic transition matrix W(y|x), shape |Y| x |X|."""
    entries: np.ndarray

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    def tolist(self):
        return self.entries.tolist()


@dataclass(frozen=True, eq=False)
class PerturbationVector:
    """Direction L in which a conditional input distribution leaves its reference.

    A vector may span several inputs (the stacked common-message vector of a
    MAC); ``references`` then holds one distribution per block, in order, and
    each block is orthogonal to the square root of its own reference.
    """
    entries: np.ndarray
    references: Tuple[ProbabilityVector, ...]

    @property
    def reference(self) -> ProbabilityVector:
        if len(self.references) != 1:
            raise DimensionMismatchError(
                "Stacked perturbation has no single reference",
                blocks=len(self.references),
            )
        return self.references[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def blocks(self) -> Tuple[np.ndarray, ...]:
        offsets = np.cumsum([ref.alphabet_size for ref in self.references])[:-1]
        return tuple(np.split(self.entries, offsets))

    def tilted(self) -> np.ndarray:
        """J = [sqrt(P)] L, the additive perturbation of the distribution itself."""
        return np.concatenate([ref.sqrt * block for ref, block in zip(self.references, self.blocks())])

    def tolist(self):
        return self.entries.tolist()


def validate_distribution(values: Sequence[float], tolerance: Optional[float] = None) -> ProbabilityVector:
    """Validate a raw vector as a probability distribution."""
    tol = settings.input_tolerance if tolerance is None else tolerance
    array = np.asarray(values, dtype=float).reshape(-1)
    if array.size == 0:
        raise DimensionMismatchError("Distribution has an empty alphabet", size=0)
    if not np.all(np.isfinite(array)):
        raise NegativeEntryError("Distribution has non-finite entries", entries=array.tolist())

    negative = np.flatnonzero(array < -tol)
    if negative.size:
        raise NegativeEntryError(
            f"Entry {int(negative[0])} is negative ({array[negative[0]]})",
            index=int(negative[0]),
        )

    deviation = float(array.sum() - 1.0)
    if abs(deviation) > tol:
        raise SumNotOneError(f"Entries sum to {array.sum()!r}, not 1", deviation=deviation)

    array = np.clip(array, 0.0, None)
    return ProbabilityVector(frozen_array(array / array.sum()))


def validate_channel(rows: Sequence[Sequence[float]], tolerance: Optional[float] = None) -> ChannelMatrix:
    """Validate a raw |Y| x |X| matrix whose columns are conditional distributions."""
    tol = settings.input_tolerance if tolerance is None else tolerance
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise DimensionMismatchError("Channel must be a non-empty 2-D matrix", shape=list(matrix.shape))
    if not np.all(np.isfinite(matrix)):
        raise NegativeEntryError("Channel has non-finite entries")

    bad = np.argwhere((matrix < -tol) | (matrix > 1.0 + tol))
    if bad.size:
        y, x = (int(k) for k in bad[0])
        raise NegativeEntryError(f"W({y}|{x}) = {matrix[y, x]} is outside [0, 1]", row=y, col=x)

    sums = matrix.sum(axis=0)
    worst = int(np.argmax(np.abs(sums - 1.0)))
    if abs(sums[worst] - 1.0) > tol:
        raise SumNotOneError(
            f"Column {worst} sums to {sums[worst]!r}, not 1",
            deviation=float(sums[worst] - 1.0),
            col=worst,
        )

    matrix = np.clip(matrix, 0.0, 1.0)
    return ChannelMatrix(frozen_array(matrix / matrix.sum(axis=0, keepdims=True)))


def make_perturbation(
    values: Sequence[float],
    references: Sequence[ProbabilityVector],
    tolerance: Optional[float] = None,
) -> PerturbationVector:
    """Validate L: norm at most 1 and each block orthogonal to sqrt of its reference."""
    tol = settings.input_tolerance if tolerance is None else tolerance
    refs = tuple(references)
    array = np.asarray(values, dtype=float).reshape(-1)
    expected = sum(ref.alphabet_size for ref in refs)
    if array.size != expected:
        raise DimensionMismatchError(
            f"Perturbation has {array.size} entries, references span {expected}",
            size=int(array.size),
            expected=int(expected),
        )

    norm = float(np.linalg.norm(array))
    if norm > 1.0 + tol:
        raise InvalidPerturbationError(f"Perturbation norm {norm} exceeds 1", norm=norm)

    vector = PerturbationVector(frozen_array(array), refs)
    for index, (ref, block) in enumerate(zip(refs, vector.blocks())):
        inner = float(ref.sqrt @ block)
        if abs(inner) > tol:
            raise InvalidPerturbationError(
                f"Block {index} is not orthogonal to sqrt(P) (inner product {inner})",
                block=index,
                inner_product=inner,
            )
    return vector


def apply_channel(w: ChannelMatrix, p: ProbabilityVector) -> ProbabilityVector:
    """P_Y = W P_X."""
    if w.cols != p.alphabet_size:
        raise DimensionMismatchError(
            f"Channel has {w.cols} inputs, distribution has {p.alphabet_size} symbols",
            cols=w.cols,
            alphabet_size=p.alphabet_size,
        )
    output = w.entries @ p.entries
    return ProbabilityVector(frozen_array(output / output.sum()))


def kl_divergence(p: ProbabilityVector, q: ProbabilityVector) -> float:
    """D(P||Q) in nats."""
    if p.alphabet_size != q.alphabet_size:
        raise DimensionMismatchError(
            "Distributions live on different alphabets",
            sizes=[p.alphabet_size, q.alphabet_size],
        )
    uncovered = np.flatnonzero((p.entries > 0.0) & (q.entries <= 0.0))
    if uncovered.size:
        raise SupportMismatchError(
            f"Q vanishes on symbol {int(uncovered[0])} where P is positive",
            symbol=int(uncovered[0]),
        )
    return float(max(rel_entr(p.entries, q.entries).sum(), 0.0))


def perturb(base: ProbabilityVector, l: PerturbationVector, epsilon: float) -> ProbabilityVector:
    """P + epsilon * [sqrt(P)] L, which must stay on the simplex."""
    if len(l.references) != 1 or l.entries.size != base.alphabet_size:
        raise DimensionMismatchError(
            "Perturbation does not match the base distribution",
            base_size=base.alphabet_size,
            size=int(l.entries.size),
        )
    moved = base.entries + epsilon * base.sqrt * l.entries
    low = float(moved.min())
    if low < -settings.internal_tolerance:
        raise InvalidPerturbationError(
            f"Perturbed distribution has a negative entry ({low}) at epsilon={epsilon}",
            epsilon=epsilon,
            minimum=low,
        )
    moved = np.clip(moved, 0.0, None)
    return ProbabilityVector(frozen_array(moved / moved.sum()))


def local_kl_approx(base: ProbabilityVector, l: PerturbationVector, epsilon: float) -> float:
    """Quadratic approximation 1/2 eps^2 ||L||^2 of D(P + eps sqrt(P) L || P)."""
    perturb(base, l, epsilon)
    return 0.5 * epsilon ** 2 * float(l.entries @ l.entries)
