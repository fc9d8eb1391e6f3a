"""k-median and constrained k-means objectives."""

from __future__ import annotations

from typing import Iterable, Optional, Tuple

import numpy as np

from .core import SetObjective, Session, SolutionSet
from .exceptions import ConfigError, GuardError

SUPERMODULAR_TOL = 1e-9
SUPERMODULAR_MAX_N = 12


def _as_matrix(a, name) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ConfigError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError(f"{name} has non-finite entries")
    return a


class CostMatrix:
    """Assignment costs ``w[i, j] >= 0``; rows are data points, columns candidate centers."""

    def __init__(self, costs):
        costs = _as_matrix(costs, "costs")
        if np.any(costs < 0):
            raise ConfigError("costs must be non-negative")
        self.costs = costs
        self.costs.setflags(write=False)

    @property
    def shape(self):
        return self.costs.shape


class PointSet:
    """``m`` points in ``d`` dimensions, one per row."""

    def __init__(self, points):
        self.points = _as_matrix(points, "points")
        self.points.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]

    def squared_distances(self) -> np.ndarray:
        x = self.points
        diff = x[:, None, :] - x[None, :, :]
        return np.sum(diff * diff, axis=2)


class KMedianObjective(SetObjective):
    """``f(S) = sum_i min_{j in S} w[i, j]``, with ``f({}) = inf``."""

    def __init__(self, costs):
        if not isinstance(costs, CostMatrix):
            costs = CostMatrix(costs)
        self.cost_matrix = costs
        self.n = costs.shape[1]

    @property
    def costs(self) -> np.ndarray:
        return self.cost_matrix.costs

    def evaluate(self, S: Iterable[int]) -> float:
        idx = list(S)
        if not idx:
            return float("inf")
        return float(np.sum(np.min(self.costs[:, idx], axis=1)))

    def session(self, S0=()) -> "KMedianSession":
        return KMedianSession(self, S0)


class KMedianSession(Session):
    # keeps each row's current nearest-center cost
    def __init__(self, objective: KMedianObjective, S0=()):
        self.objective = objective
        self.selected = SolutionSet.coerce(S0, objective.n)
        w = objective.costs
        if len(self.selected):
            self.row_min = np.min(w[:, list(self.selected)], axis=1)
        else:
            self.row_min = np.full(w.shape[0], np.inf)
        self.value = float(np.sum(self.row_min))

    def candidate_values(self) -> np.ndarray:
        vals = np.sum(np.minimum(self.row_min[:, None], self.objective.costs), axis=0)
        vals[list(self.selected)] = np.inf
        return vals

    def add(self, i: int) -> float:
        self.selected = self.selected.add(i)
        self.row_min = np.minimum(self.row_min, self.objective.costs[:, i])
        self.value = float(np.sum(self.row_min))
        return self.value


class KMeansObjective(KMedianObjective):
    """Constrained k-means: centers are drawn from the data points themselves."""

    def __init__(self, points):
        if not isinstance(points, PointSet):
            points = PointSet(points)
        self.point_set = points
        super().__init__(CostMatrix(points.squared_distances()))

    @property
    def points(self) -> np.ndarray:
        return self.point_set.points


def kmedian_objective(costs) -> KMedianObjective:
    return KMedianObjective(costs)


def kmeans_constrained_objective(points) -> KMeansObjective:
    return KMeansObjective(points)


def unconstrained_ratio_bound(epsilon: float) -> float:
    """Approximation factor against the *unconstrained* k-means optimum.

    A ``(1 + epsilon)`` solution of the constrained problem is within
    ``2 * (1 + epsilon)`` of the unconstrained optimum, since restricting
    centers to data points at most doubles the optimal cost.
    """
    return 2.0 * (1.0 + epsilon)


def verify_supermodular(
    f: SetObjective, n: Optional[int] = None, tol: float = SUPERMODULAR_TOL, max_n: int = SUPERMODULAR_MAX_N
) -> Tuple[bool, Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    """Exhaustively check ``f(S & T) + f(S | T) >= f(S) + f(T)``.

    Pairs where any of the four values is infinite (the empty-set sentinel)
    are skipped. Returns ``(True, None)`` or ``(False, (S, T))`` for the first
    violating pair in mask order.
    """
    n = f.n if n is None else n
    if n > max_n:
        raise GuardError(f"exhaustive supermodularity check refused for n={n} > {max_n}")
    from .oracle import mask_to_tuple, subset_values

    F = subset_values(f, n, max_n=max_n)
    masks = np.arange(F.size)
    finite = np.isfinite(F)
    for s in range(F.size):
        if not finite[s]:
            continue
        inter = F[s & masks]
        union = F[s | masks]
        ok = finite & np.isfinite(inter) & np.isfinite(union)
        viol = ok & (inter + union < F[s] + F - tol)
        if viol.any():
            t = int(np.flatnonzero(viol)[0])
            return False, (mask_to_tuple(s), mask_to_tuple(t))
    return True, None
