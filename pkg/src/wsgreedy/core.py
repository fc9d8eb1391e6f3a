"""Set-function abstractions and greedy extension.

The greedy loop starts from a warm-start solution ``S0`` and repeatedly adds the
element whose inclusion gives the smallest objective value. Two stopping rules
are offered:

* :func:`greedy_extend` runs a fixed number of steps, ``ceil(alpha*k*ln(f(S0)/E))``,
  after which ``f(S) <= f(S*) + E`` for every weakly-alpha-supermodular ``f``.
* :func:`greedy_extend_until` runs until the objective drops below a threshold.

Objectives expose a *session*: a mutable cursor over a growing solution that
can score every candidate at once. The default session simply calls
:meth:`SetObjective.evaluate`; concrete objectives override it with
incremental updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ConfigError, GroundSetExhausted

#: Absolute tolerance for comparing objective values.
DEFAULT_ATOL = 1e-12


# ---------------------------------------------------------------------------
# Ground set and solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundSet:
    """Elements ``0 .. n-1``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"ground set size must be a positive integer, got {self.n!r}")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.n))

    def __len__(self) -> int:
        return self.n


class SolutionSet:
    """Ordered, duplicate-free subset of ``range(n)``.

    Insertion order is kept so a solution doubles as a record of the greedy
    history. Instances are immutable; :meth:`add` returns a new set.
    """

    __slots__ = ("_elements", "_members", "n")

    def __init__(self, elements: Iterable[int] = (), n: int = None):
        elems = tuple(int(i) for i in elements)
        members = frozenset(elems)
        if len(members) != len(elems):
            raise ConfigError(f"duplicate indices in solution {list(elems)}")
        if n is not None:
            bad = [i for i in elems if not 0 <= i < n]
            if bad:
                raise ConfigError(f"indices {bad} outside ground set of size {n}")
        elif any(i < 0 for i in elems):
            raise ConfigError(f"negative indices in solution {list(elems)}")
        self._elements = elems
        self._members = members
        self.n = n

    @classmethod
    def coerce(cls, value, n: int = None) -> "SolutionSet":
        if isinstance(value, SolutionSet) and (n is None or value.n == n):
            return value
        return cls(value if value is not None else (), n)

    @property
    def elements(self) -> Tuple[int, ...]:
        return self._elements

    def add(self, i: int) -> "SolutionSet":
        if i in self._members:
            raise ConfigError(f"element {i} already in solution")
        return SolutionSet(self._elements + (int(i),), self.n)

    def union(self, other: Iterable[int]) -> "SolutionSet":
        out = self
        for i in other:
            if i not in out:
                out = out.add(i)
        return out

    def sorted(self) -> Tuple[int, ...]:
        return tuple(sorted(self._elements))

    def mask(self) -> int:
        m = 0
        for i in self._elements:
            m |= 1 << i
        return m

    def __contains__(self, i) -> bool:
        return i in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def __eq__(self, other) -> bool:
        if isinstance(other, SolutionSet):
            return self._members == other._members
        try:
            return self._members == frozenset(other)
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return f"SolutionSet({list(self._elements)})"


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


class SetObjective:
    """Non-negative, non-increasing set function over ``range(n)``.

    Subclasses implement :meth:`evaluate`. ``evaluate`` must be pure: the
    candidate scan may call it from several threads at once.
    """

    n: int

    def evaluate(self, S: Iterable[int]) -> float:
        raise NotImplementedError

    def gain(self, S: Iterable[int], i: int) -> float:
        """``f(S) - f(S + {i})``."""
        S = list(S)
        if i in S:
            return 0.0
        return self.evaluate(S) - self.evaluate(S + [i])

    def session(self, S0: Iterable[int] = ()) -> "Session":
        return Session(self, S0)

    @property
    def ground_set(self) -> GroundSet:
        return GroundSet(self.n)

    def __call__(self, S: Iterable[int]) -> float:
        return self.evaluate(S)


class SetFunction(SetObjective):
    """Wrap an arbitrary callable ``func(frozenset) -> float`` as an objective."""

    def __init__(self, n: int, func: Callable[[frozenset], float]):
        self.n = GroundSet(n).n
        self._func = func

    def evaluate(self, S: Iterable[int]) -> float:
        return float(self._func(frozenset(int(i) for i in S)))


class Session:
    """Cursor over a growing solution.

    ``candidate_values()`` returns an array of length ``n`` holding
    ``f(S + {i})`` for every ``i`` not in ``S`` and ``inf`` for members.
    """

    def __init__(self, objective: SetObjective, S0: Iterable[int] = ()):
        self.objective = objective
        self.selected = SolutionSet.coerce(S0, objective.n)
        self.value = float(objective.evaluate(self.selected))

    def candidate_values(self) -> np.ndarray:
        f = self.objective
        out = np.full(f.n, np.inf)
        base = list(self.selected)
        for i in range(f.n):
            if i not in self.selected:
                out[i] = f.evaluate(base + [i])
        return out

    def add(self, i: int) -> float:
        self.selected = self.selected.add(i)
        self.value = float(self.objective.evaluate(self.selected))
        return self.value

    @property
    def exhausted(self) -> bool:
        return len(self.selected) >= self.objective.n


# ---------------------------------------------------------------------------
# Budgets and traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreedyBudget:
    alpha: float
    k: int
    target_error: float

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ConfigError(f"alpha must be >= 1, got {self.alpha}")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")
        if not self.target_error > 0:
            raise ConfigError(f"target_error must be positive, got {self.target_error}")

    def steps(self, f_initial: float) -> int:
        if f_initial <= self.target_error:
            return 0
        return iteration_budget(self.alpha, self.k, f_initial, self.target_error)


@dataclass(frozen=True)
class TraceStep:
    t: int
    element: int
    value: float


@dataclass
class GreedyTrace:
    """Per-iteration record of a greedy run.

    ``stop_reason`` is one of ``"budget"``, ``"target"``, ``"max_steps"``,
    ``"exhausted"``, ``"zero"`` or ``"stalled"``.
    """

    initial_value: float
    steps: List[TraceStep] = field(default_factory=list)
    stop_reason: str = "budget"
    budget: Optional[int] = None
    target_error: Optional[float] = None

    @property
    def elements(self) -> List[int]:
        return [s.element for s in self.steps]

    @property
    def values(self) -> List[float]:
        return [s.value for s in self.steps]

    @property
    def final_value(self) -> float:
        return self.steps[-1].value if self.steps else self.initial_value

    def __len__(self) -> int:
        return len(self.steps)

    def to_list(self) -> list:
        return [{"t": s.t, "element": s.element, "value": s.value} for s in self.steps]


def iteration_budget(alpha: float, k: int, f_initial: float, target_error: float) -> int:
    """Number of greedy steps ``ceil(alpha * k * ln(f_initial / target_error))``.

    Returns 0 when ``f_initial <= target_error``.
    """
    if not f_initial > 0:
        raise ConfigError(f"f_initial must be positive, got {f_initial}")
    if not target_error > 0:
        raise ConfigError(f"target_error must be positive, got {target_error}")
    if not alpha >= 1:
        raise ConfigError(f"alpha must be >= 1, got {alpha}")
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if math.isinf(f_initial):
        raise ConfigError("f_initial is infinite; start from a non-empty warm start")
    if f_initial <= target_error:
        return 0
    return int(math.ceil(alpha * k * math.log(f_initial / target_error)))


# ---------------------------------------------------------------------------
# Greedy operations
# ---------------------------------------------------------------------------

Observer = Callable[[int, SolutionSet, np.ndarray], None]


def argmin_candidate(values: np.ndarray, atol: float) -> int:
    # lowest index among candidates within atol of the minimum
    best = np.min(values)
    if not np.isfinite(best):
        raise GroundSetExhausted("no candidate with a finite objective value")
    return int(np.flatnonzero(values <= best + atol)[0])


def greedy_step(f: SetObjective, S: Union[SolutionSet, Sequence[int]], atol: float = DEFAULT_ATOL) -> Tuple[int, float]:
    """Return the element ``i`` not in ``S`` minimizing ``f(S + {i})`` and that value.

    Ties go to the lowest index.
    """
    S = SolutionSet.coerce(S, f.n)
    if len(S) >= f.n:
        raise GroundSetExhausted(f"solution already holds all {f.n} elements")
    values = f.session(S).candidate_values()
    i = argmin_candidate(values, atol)
    return i, float(values[i])


def _run(session: Session, steps: int, trace: GreedyTrace, observer, atol, f_stop=None):
    t = 0
    reason = "budget" if f_stop is None else "max_steps"
    while t < steps:
        if f_stop is not None and session.value <= f_stop + atol:
            reason = "target"
            break
        if session.value == 0.0:
            reason = "zero"
            break
        if session.exhausted:
            reason = "exhausted"
            break
        values = session.candidate_values()
        i = argmin_candidate(values, atol)
        if f_stop is not None and values[i] >= session.value - atol:
            reason = "stalled"
            break
        if observer is not None:
            observer(t + 1, session.selected, values)
        session.add(i)
        t += 1
        trace.steps.append(TraceStep(t, i, session.value))
    else:
        if f_stop is not None and session.value <= f_stop + atol:
            reason = "target"
    trace.stop_reason = reason
    return session.selected, trace


def greedy_extend(
    f: SetObjective,
    S0: Union[SolutionSet, Sequence[int]],
    budget: GreedyBudget,
    *,
    observer: Optional[Observer] = None,
    atol: float = DEFAULT_ATOL,
) -> Tuple[SolutionSet, GreedyTrace]:
    """Greedily extend ``S0`` for ``ceil(alpha*k*ln(f(S0)/E))`` steps.

    Stops early only when the objective hits exactly zero or every element
    has been selected.

    Parameters
    ----------
    f : SetObjective
    S0 : SolutionSet or sequence of int
        Warm start. Must have a finite objective value.
    budget : GreedyBudget
    observer : callable, optional
        Called as ``observer(t, S_prev, candidate_values)`` before each step.

    Returns
    -------
    (SolutionSet, GreedyTrace)
    """
    session = f.session(S0)
    f0 = session.value
    if not math.isfinite(f0):
        raise ConfigError("f(S0) is not finite; clustering objectives need a non-empty warm start")
    steps = budget.steps(f0) if f0 > 0 else 0
    trace = GreedyTrace(f0, budget=steps, target_error=budget.target_error)
    if steps == 0:
        trace.stop_reason = "zero" if f0 == 0 else "target"
        return session.selected, trace
    return _run(session, steps, trace, observer, atol)


def greedy_extend_until(
    f: SetObjective,
    S0: Union[SolutionSet, Sequence[int]],
    f_stop: float,
    max_steps: Optional[int] = None,
    *,
    observer: Optional[Observer] = None,
    atol: float = DEFAULT_ATOL,
) -> Tuple[SolutionSet, GreedyTrace]:
    """Greedily extend ``S0`` until ``f(S) <= f_stop``.

    Also stops after ``max_steps`` additions (default: the size of the ground
    set), when the ground set runs out, or when no element lowers the
    objective. ``trace.stop_reason`` says which of ``"target"``,
    ``"max_steps"``, ``"exhausted"``, ``"stalled"`` fired.
    """
    if not f_stop >= 0:
        raise ConfigError(f"f_stop must be non-negative, got {f_stop}")
    if max_steps is None:
        max_steps = f.n
    if max_steps < 1:
        raise ConfigError(f"max_steps must be >= 1, got {max_steps}")
    session = f.session(S0)
    if math.isnan(session.value):
        raise ConfigError("f(S0) is NaN")
    trace = GreedyTrace(session.value, budget=max_steps)
    return _run(session, max_steps, trace, observer, atol, f_stop=f_stop)


def bicriteria_solve(
    f: SetObjective,
    initializer: Callable[[SetObjective, int], object],
    rho: float,
    k: int,
    alpha: float,
    epsilon: float,
    *,
    observer: Optional[Observer] = None,
    atol: float = DEFAULT_ATOL,
) -> Tuple[SolutionSet, GreedyTrace]:
    """Warm-start with ``initializer`` then extend greedily to a ``(1+epsilon)`` solution.

    The initializer must return a solution with ``f(S0) <= rho * f(S*)``.
    The additive target is ``E = epsilon * f(S0) / rho``, giving a budget of
    ``ceil(alpha * k * ln(rho / epsilon))`` extra elements.
    """
    if not rho >= 1:
        raise ConfigError(f"rho must be >= 1, got {rho}")
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    init = initializer(f, k)
    S0 = getattr(init, "solution", init)
    session = f.session(S0)
    f0 = session.value
    if not math.isfinite(f0):
        raise ConfigError("initializer returned a solution with infinite objective")
    steps = iteration_budget(alpha, k, rho, epsilon) if rho > epsilon else 0
    trace = GreedyTrace(f0, budget=steps, target_error=epsilon * f0 / rho)
    if steps == 0 or f0 == 0:
        trace.stop_reason = "zero" if f0 == 0 else "target"
        return session.selected, trace
    return _run(session, steps, trace, observer, atol)
