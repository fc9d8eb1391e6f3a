"""Warm starts for greedy extension."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .clustering import KMeansObjective, PointSet
from .core import SetObjective, SolutionSet, argmin_candidate, DEFAULT_ATOL
from .exceptions import ConfigError, StallError

#: Reported approximation constant for D^2 sampling. The cited analysis gives
#: an O(1) factor without a number; this is a reporting default only.
D2_CLAIMED_RHO = 20.0
D2_DEFAULT_BETA = 2.0


def seeded_rng(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class InitializerResult:
    solution: SolutionSet
    claimed_rho: Optional[float]
    method: str
    value: float

    def __post_init__(self):
        if len(self.solution) == 0:
            raise ConfigError("initializer produced an empty solution")
        if self.claimed_rho is not None and not self.claimed_rho >= 1:
            raise ConfigError(f"claimed_rho must be >= 1, got {self.claimed_rho}")


def d2_adaptive_sample(points, k: int, beta: float = D2_DEFAULT_BETA, rng=None, claimed_rho: float = D2_CLAIMED_RHO) -> InitializerResult:
    """Draw ``ceil(beta * k)`` data points by D^2 sampling.

    The first point is uniform; each later point is drawn with probability
    proportional to its squared distance to the nearest point already drawn.
    Sampling ends early once every point coincides with a chosen one.
    """
    if isinstance(points, KMeansObjective):
        objective = points
    else:
        objective = KMeansObjective(points if isinstance(points, PointSet) else PointSet(points))
    m = objective.n
    if int(k) != k or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k}")
    if not beta >= 1:
        raise ConfigError(f"beta must be >= 1, got {beta}")
    count = math.ceil(beta * k)
    if k > m or count > m:
        raise ConfigError(f"need at least {count} points for k={k}, beta={beta}; have {m}")
    rng = seeded_rng(rng)
    D = objective.costs
    first = int(rng.integers(m))
    chosen = [first]
    dist = D[first].copy()
    while len(chosen) < count:
        total = dist.sum()
        if total <= 0:
            break
        nxt = int(rng.choice(m, p=dist / total))
        chosen.append(nxt)
        dist = np.minimum(dist, D[nxt])
    S = SolutionSet(chosen, m)
    return InitializerResult(S, claimed_rho, f"d2(beta={beta:g})", objective.evaluate(S))


def greedy_init(f: SetObjective, k: int) -> InitializerResult:
    """``k`` plain greedy steps from the empty set.

    For objectives with ``f({}) = inf`` the first step picks the best
    singleton. ``claimed_rho`` is ``k + 1`` for column subset selection and
    ``None`` (unverified) for everything else.
    """
    if int(k) != k or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k}")
    if k > f.n:
        raise ConfigError(f"k={k} exceeds ground set size {f.n}")
    session = f.session(())
    for _ in range(k):
        values = session.candidate_values()
        i = argmin_candidate(values, DEFAULT_ATOL)
        if len(session.selected) and values[i] >= session.value:
            raise StallError(f"greedy_init stalled after {len(session.selected)} elements", partial=session.selected)
        session.add(i)
    rho = float(k + 1) if getattr(f, "is_css", False) else None
    return InitializerResult(session.selected, rho, "greedy", session.value)
