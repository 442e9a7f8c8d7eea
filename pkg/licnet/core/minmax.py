"""Max-min of two quadratic forms on the unit sphere.

Solves  max_{||x|| = 1, x in span(basis)}  min(x'A1x, x'A2x)

which is the common-message program of the broadcast and interference
parameters. The dual value  min_t lambda_max(t A1 + (1 - t) A2)  is an upper
bound; the primal is recovered from the top eigenspace at the minimizing
weight and then challenged by seeded projected supergradient restarts.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .config import settings
from .errors import NumericalFailureError, SolverDidNotConvergeError

logger = logging.getLogger(__name__)

# Eigenvalues this close to the top one are treated as one eigenspace.
CLUSTER_TOLERANCE = 1e-7


@dataclass(frozen=True)
class MinMaxSolution:
    value: float
    dual_bound: float
    gap: float
    vector: np.ndarray
    weight: float
    restarts: int


def _top_eigen(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"Eigendecomposition failed: {str(e)}") from e


def _dual(a1: np.ndarray, a2: np.ndarray) -> Tuple[float, float]:
    """Return (t*, lambda_max at t*) for the convex function t -> lambda_max(tA1 + (1-t)A2)."""
    def objective(t: float) -> float:
        return float(_top_eigen(t * a1 + (1.0 - t) * a2)[0][-1])

    candidates = [(objective(0.0), 0.0), (objective(1.0), 1.0)]
    result = minimize_scalar(objective, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    if result.success:
        candidates.append((float(result.fun), float(result.x)))
    else:
        logger.warning(f"Dual weight search did not converge: {result.message}")
    value, weight = min(candidates)
    return weight, value


def _recover(a1: np.ndarray, a2: np.ndarray, weight: float) -> np.ndarray:
    """Primal candidate inside the top eigenspace of tA1 + (1-t)A2 balancing both forms."""
    values, vectors = _top_eigen(weight * a1 + (1.0 - weight) * a2)
    scale = max(1.0, abs(values[-1]))
    top = vectors[:, values >= values[-1] - CLUSTER_TOLERANCE * scale]

    spread, directions = _top_eigen(top.T @ (a1 - a2) @ top)
    high, low = spread[-1], spread[0]
    e_high, e_low = top @ directions[:, -1], top @ directions[:, 0]

    if low <= 0.0 <= high and high - low > 0.0:
        cos_sq = -low / (high - low)
        return np.sqrt(cos_sq) * e_high + np.sqrt(1.0 - cos_sq) * e_low
    # form 1 dominates on the whole eigenspace: minimize the excess
    if low > 0.0:
        return e_low
    return e_high


def _ascent(
    a1: np.ndarray,
    a2: np.ndarray,
    restarts: int,
    seed: int,
    iterations: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Projected supergradient ascent run for all restarts at once; returns (values, vectors)."""
    dim = a1.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((dim, restarts))
    x /= np.linalg.norm(x, axis=0)

    scale = max(float(np.abs(a1).sum()), float(np.abs(a2).sum()), 1e-12)
    best_values = np.full(restarts, -np.inf)
    best_vectors = x.copy()

    for k in range(iterations):
        y1, y2 = a1 @ x, a2 @ x
        q1, q2 = np.sum(x * y1, axis=0), np.sum(x * y2, axis=0)
        current = np.minimum(q1, q2)

        improved = current > best_values
        best_values = np.where(improved, current, best_values)
        best_vectors[:, improved] = x[:, improved]

        grad = 2.0 * np.where(q1 <= q2, y1, y2)
        grad -= x * np.sum(x * grad, axis=0)
        x = x + (0.5 / (scale * np.sqrt(k + 1.0))) * grad
        x /= np.linalg.norm(x, axis=0)

    return best_values, best_vectors


def solve_minmax(
    a1: np.ndarray,
    a2: np.ndarray,
    basis: Optional[np.ndarray] = None,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    iterations: Optional[int] = None,
    gap_tolerance: Optional[float] = None,
) -> MinMaxSolution:
    """Maximize min(x'A1x, x'A2x) over unit vectors in the column span of ``basis``.

    ``a1`` and ``a2`` are symmetric PSD matrices in full coordinates; ``basis``
    has orthonormal columns (identity when omitted). The returned vector is in
    full coordinates.
    """
    restarts = settings.minmax_restarts if restarts is None else restarts
    seed = settings.minmax_seed if seed is None else seed
    iterations = settings.minmax_iterations if iterations is None else iterations
    gap_tolerance = settings.minmax_gap_tolerance if gap_tolerance is None else gap_tolerance

    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    if basis is None:
        basis = np.eye(a1.shape[0])
    width = basis.shape[1]
    if width == 0:
        return MinMaxSolution(0.0, 0.0, 0.0, np.zeros(basis.shape[0]), 0.0, 0)

    r1 = basis.T @ a1 @ basis
    r2 = basis.T @ a2 @ basis
    r1 = 0.5 * (r1 + r1.T)
    r2 = 0.5 * (r2 + r2.T)

    weight, dual_bound = _dual(r1, r2)

    candidates = [_recover(r1, r2, weight)]
    values = [min(float(candidates[0] @ r1 @ candidates[0]), float(candidates[0] @ r2 @ candidates[0]))]
    if restarts > 0 and width > 1:
        ascent_values, ascent_vectors = _ascent(r1, r2, restarts, seed, iterations)
        candidates.extend(ascent_vectors.T)
        values.extend(float(v) for v in ascent_values)

    best = int(np.argmax(values))
    value = values[best]
    gap = max(dual_bound - value, 0.0)
    logger.debug(
        f"minmax: dual {dual_bound:.12g} at t={weight:.6g}, primal {value:.12g} "
        f"from candidate {best}, gap {gap:.3e}"
    )
    if gap > gap_tolerance:
        raise SolverDidNotConvergeError(
            f"Min-max solver stopped with duality gap {gap:.3e}",
            gap=gap,
            dual_bound=dual_bound,
            value=value,
        )

    vector = basis @ candidates[best]
    vector = vector / np.linalg.norm(vector)
    return MinMaxSolution(
        value=max(value, 0.0),
        dual_bound=dual_bound,
        gap=gap,
        vector=vector,
        weight=weight,
        restarts=restarts,
    )
