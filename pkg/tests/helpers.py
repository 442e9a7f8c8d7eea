"""Independent oracles and small builders shared by the test modules."""

import itertools
from contextlib import contextmanager
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from licnet.core.probability import validate_channel, validate_distribution
from licnet.core.settings_manager import SettingsManager, reset_settings_manager

UNIFORM4 = [0.25, 0.25, 0.25, 0.25]


@contextmanager
def use_settings(**overrides):
    reset_settings_manager(SettingsManager(overrides=overrides))
    try:
        yield
    finally:
        reset_settings_manager()


def example1_channel(alpha: float):
    return validate_channel([
        [0.5, 0.5, 1 - alpha, alpha],
        [0.5, 0.5, alpha, 1 - alpha],
    ])


def example2_channels(alpha: float):
    w2 = validate_channel([
        [1 - alpha, alpha, 0.5, 0.5],
        [alpha, 1 - alpha, 0.5, 0.5],
    ])
    return example1_channel(alpha), w2


def _coefficients(alpha: float):
    return (2 - alpha) / 3, (4 - 5 * alpha) / 3, (-2 + 7 * alpha) / 3


def _binary_output(top):
    return validate_channel([top, [1 - value for value in top]])


def example3_joint(alpha: float):
    """Joint MAC channel, columns x1-major; valid for 2/7 <= alpha <= 5/7."""
    a, b, c = _coefficients(alpha)
    return _binary_output([a, a, a, alpha, a, a, a, alpha, b, b, b, alpha, c, c, b, alpha])


def example5_joints(alpha: float):
    """Joint channels seen at receiver 1 and receiver 2 of the interference example."""
    a, b, c = _coefficients(alpha)
    y2 = _binary_output([b, alpha, b, b, b, alpha, c, c, a, alpha, a, a, a, alpha, a, a])
    return example3_joint(alpha), y2


def example5_grid(alpha: float) -> np.ndarray:
    c = (1 - 2 * alpha) ** 2
    return np.array([[c / 2, c, c], [c / 4, c / 2, c / 2], [c / 4, c / 2, c / 2]])


def stochastic(raw: np.ndarray) -> np.ndarray:
    """Scale positive columns to sum to one."""
    return raw / raw.sum(axis=0, keepdims=True)


def channel_from(raw: np.ndarray):
    return validate_channel(stochastic(np.asarray(raw, dtype=float)))


def distribution_from(raw: np.ndarray):
    raw = np.asarray(raw, dtype=float)
    return validate_distribution(raw / raw.sum())


# Singular values

def jacobi_singular_values(matrix: np.ndarray, sweeps: int = 100, tolerance: float = 1e-15) -> np.ndarray:
    """One-sided Jacobi rotations until all column pairs are orthogonal."""
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p] @ a[:, p]
                beta = a[:, q] @ a[:, q]
                gamma = a[:, p] @ a[:, q]
                if abs(gamma) <= tolerance * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                column = a[:, p].copy()
                a[:, p] = c * column - s * a[:, q]
                a[:, q] = s * column + c * a[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(a, axis=0))[::-1]


# Max-min of two quadratic forms

def _sphere_points(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def sphere_search(a1: np.ndarray, a2: np.ndarray, basis: np.ndarray, resolution: int = 120, keep: int = 8) -> float:
    """max of min(x'A1x, x'A2x) over unit x in span(basis), spans of dimension <= 3.

    Dense grid over a half circle or hemisphere, then zoomed local grids
    around the best cells.
    """
    r1, r2 = basis.T @ a1 @ basis, basis.T @ a2 @ basis

    def values(points: np.ndarray) -> np.ndarray:
        q1 = np.einsum("...i,ij,...j->...", points, r1, points)
        q2 = np.einsum("...i,ij,...j->...", points, r2, points)
        return np.minimum(q1, q2)

    width = basis.shape[1]
    if width == 1:
        return float(min(r1[0, 0], r2[0, 0]))
    if width == 2:
        step = np.pi / 2000
        theta = np.arange(2000) * step
        coarse = values(np.stack([np.cos(theta), np.sin(theta)], axis=-1))
        best = -np.inf
        for index in np.argsort(coarse)[::-1][:keep]:
            t, span = theta[index], step
            for _ in range(10):
                tt = np.linspace(t - span, t + span, 21)
                local = values(np.stack([np.cos(tt), np.sin(tt)], axis=-1))
                t = tt[int(np.argmax(local))]
                span /= 5.0
            best = max(best, float(local.max()))
        return best
    if width != 3:
        raise ValueError(f"sphere_search handles spans up to dimension 3, got {width}")

    step = np.pi / resolution
    theta, phi = np.meshgrid(np.linspace(0.0, np.pi, resolution + 1), np.arange(resolution) * step, indexing="ij")
    coarse = values(_sphere_points(theta, phi)).ravel()
    best = -np.inf
    for index in np.argsort(coarse)[::-1][:keep]:
        t, p = theta.ravel()[index], phi.ravel()[index]
        span = step
        for _ in range(10):
            tt, pp = np.meshgrid(np.linspace(t - span, t + span, 21), np.linspace(p - span, p + span, 21), indexing="ij")
            local = values(_sphere_points(tt, pp)).ravel()
            k = int(np.argmax(local))
            t, p = tt.ravel()[k], pp.ravel()[k]
            span /= 5.0
        best = max(best, float(local[k]))
    return best


# Linear programs

def linprog_max(
    objective: np.ndarray,
    a_ub: Optional[np.ndarray] = None,
    b_ub: Optional[np.ndarray] = None,
    a_eq: Optional[np.ndarray] = None,
    b_eq: Optional[np.ndarray] = None,
) -> float:
    result = linprog(-np.asarray(objective, dtype=float), A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                     bounds=(0, None), method="highs")
    assert result.status == 0, result.message
    return -float(result.fun)


def vertex_enumeration(objective: np.ndarray, a_ub: np.ndarray, b_ub: np.ndarray) -> float:
    """Best basic feasible solution of max c'x, A x <= b, x >= 0 (bounded region)."""
    n = objective.size
    a = np.vstack([a_ub, -np.eye(n)])
    b = np.concatenate([b_ub, np.zeros(n)])
    best = -np.inf
    for rows in itertools.combinations(range(b.size), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ x <= b + 1e-9):
            best = max(best, float(objective @ x))
    return best


def balance_lp(sigma: np.ndarray) -> float:
    """Best single-layer throughput with outflow == inflow at every virtual node."""
    rows = np.zeros((3, 9))
    for i in range(3):
        for j in range(3):
            rows[i, 3 * i + j] += sigma[i, j]
            rows[j, 3 * i + j] -= sigma[i, j]
    return linprog_max(sigma.reshape(-1), np.ones((1, 9)), np.array([1.0]), rows, np.zeros(3))


# Paths

def brute_force_path(costs: np.ndarray, starts: Sequence[int], ends: Sequence[int]) -> Tuple[float, Tuple[int, ...]]:
    """Cheapest node sequence, summed from the last layer backwards; first in lexicographic order on ties."""
    num_layers = costs.shape[0]
    best_total, best_nodes = np.inf, None
    for nodes in itertools.product(range(3), repeat=num_layers + 1):
        if nodes[0] not in starts or nodes[-1] not in ends:
            continue
        total = 0.0
        for layer in range(num_layers - 1, -1, -1):
            total = costs[layer, nodes[layer], nodes[layer + 1]] + total
        if best_nodes is None or total < best_total:
            best_total, best_nodes = total, nodes
    return best_total, best_nodes


def valid_grid(lambdas: Sequence[float], shares: Sequence[float]) -> np.ndarray:
    """A grid satisfying every chain, built from four link values and four shares in [0, 1].

    Each constrained entry is placed between its lower and upper bound.
    """
    s11, s12, s21, s22 = lambdas
    grid = np.zeros((3, 3))
    grid[1, 1], grid[1, 2], grid[2, 1], grid[2, 2] = s11, s12, s21, s22

    def between(low: float, high: float, share: float) -> float:
        return low + share * (high - low)

    def half(a: float, b: float) -> float:
        return a * b / (a + b) if a + b > 0 else 0.0

    grid[1, 0] = between(half(s11, s12), min(s11, s12), shares[0])
    grid[2, 0] = between(half(s21, s22), min(s21, s22), shares[1])
    grid[0, 1] = between(max(s11, s21), s11 + s21, shares[2])
    grid[0, 2] = between(max(s12, s22), s12 + s22, shares[3])
    grid[0, 0] = between(half(grid[0, 1], grid[0, 2]), min(grid[0, 1], grid[0, 2]), 0.5)
    return grid
