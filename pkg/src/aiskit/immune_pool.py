"""Bounded antibody pool driven by stimulation/decay concentration dynamics.

Each antibody's concentration follows

    dx_i/dt = k2 * sum_j(m_ji * x_i * y_j) - k3 * x_i

integrated with an explicit Euler step of size ``dt``. In ``fixed_amount``
mode the decay term is a constant ``fixed_decay`` instead of ``k3 * x_i``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, EmptyPoolError

DECAY_MODES = ("proportional", "fixed_amount")


@dataclass
class Antibody:
    id: Any
    shape: Any = None
    concentration: float = 1.0

    def __post_init__(self):
        if self.concentration < 0:
            raise ValueError("concentration must be non-negative")


@dataclass(frozen=True)
class AntigenSet:
    antigens: tuple
    concentrations: tuple[float, ...] = ()

    def __post_init__(self):
        antigens = tuple(self.antigens)
        conc = tuple(float(y) for y in self.concentrations) or (1.0,) * len(antigens)
        if len(conc) != len(antigens):
            raise DimensionError("one concentration per antigen is required")
        if any(y <= 0 for y in conc):
            raise ValueError("antigen concentrations must be positive")
        object.__setattr__(self, "antigens", antigens)
        object.__setattr__(self, "concentrations", conc)

    @classmethod
    def single(cls, antigen, concentration: float = 1.0) -> "AntigenSet":
        return cls((antigen,), (concentration,))

    @property
    def n(self) -> int:
        return len(self.antigens)


@dataclass(frozen=True)
class PoolConfig:
    """Dynamics parameters.

    ``removal_floor`` and ``saturation_cap`` default to ``0.1`` and ``100``
    times ``initial_concentration``.
    """

    capacity: int = 10
    k2: float = 0.1
    k3: float = 0.05
    dt: float = 1.0
    decay_mode: str = "proportional"
    fixed_decay: float = 0.05
    removal_floor: float | None = None
    saturation_cap: float | None = None
    stability_window: int = 10
    max_iterations: int = 10_000
    initial_concentration: float = 1.0

    def __post_init__(self):
        if self.removal_floor is None:
            object.__setattr__(self, "removal_floor", 0.1 * self.initial_concentration)
        if self.saturation_cap is None:
            object.__setattr__(self, "saturation_cap", 100.0 * self.initial_concentration)
        self.validate()

    def validate(self):
        problems = []
        if self.capacity < 1:
            problems.append("capacity must be a positive integer")
        for name in ("k2", "k3", "dt", "fixed_decay", "initial_concentration", "saturation_cap"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.decay_mode not in DECAY_MODES:
            problems.append(f"decay_mode must be one of {DECAY_MODES}")
        if self.removal_floor < 0:
            problems.append("removal_floor must be non-negative")
        if not self.removal_floor < self.initial_concentration <= self.saturation_cap:
            problems.append("need removal_floor < initial_concentration <= saturation_cap")
        if self.decay_mode == "proportional" and not self.dt * self.k3 < 1:
            problems.append("dt * k3 must be < 1 in proportional mode")
        if self.stability_window < 1 or self.max_iterations < 1:
            problems.append("stability_window and max_iterations must be positive")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass
class Candidate:
    """An antibody waiting to enter, with its match value against each antigen."""

    antibody: Antibody
    matches: tuple[float, ...]

    def __post_init__(self):
        self.matches = tuple(float(m) for m in self.matches)
        if any(m < 0 for m in self.matches):
            raise ValueError("match values must be non-negative")


class ImmunePool:
    """Antibody members plus the match matrix ``m[j, i]`` (antigen j, member i).

    Single-writer: ``step`` and ``run_to_stability`` mutate the pool in place.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.members: list[Antibody] = []
        self._matches: list[tuple[float, ...]] = []
        self.match_matrix = np.zeros((0, 0))

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[Antibody]:
        return iter(self.members)

    @property
    def full(self) -> bool:
        return len(self.members) >= self.capacity

    @property
    def ids(self) -> tuple:
        return tuple(ab.id for ab in self.members)

    def add(self, candidate: Candidate) -> None:
        if self.full:
            raise OverflowError("pool is at capacity")
        if self._matches and len(candidate.matches) != len(self._matches[0]):
            raise DimensionError("candidate match vector length differs from pool's antigen count")
        self.members.append(candidate.antibody)
        self._matches.append(candidate.matches)
        self._rebuild()

    def remove_where(self, mask: Sequence[bool]) -> list[Antibody]:
        removed = [ab for ab, gone in zip(self.members, mask) if gone]
        if removed:
            keep = [i for i, gone in enumerate(mask) if not gone]
            self.members = [self.members[i] for i in keep]
            self._matches = [self._matches[i] for i in keep]
            self._rebuild()
        return removed

    def _rebuild(self):
        if self._matches:
            self.match_matrix = np.array(self._matches, dtype=float).T
        else:
            self.match_matrix = np.zeros((0, 0))

    @property
    def concentrations(self) -> np.ndarray:
        return np.array([ab.concentration for ab in self.members], dtype=float)


def step(pool: ImmunePool, antigens: AntigenSet, cfg: PoolConfig) -> list:
    """Advance every member by one Euler step; return ids of removed members.

    Concentrations are clamped to ``[0, saturation_cap]`` and any member
    left below ``removal_floor`` is dropped from the pool.
    """
    return [ab.id for ab in _step(pool, antigens, cfg)]


def _step(pool, antigens, cfg) -> list[Antibody]:
    if not len(pool):
        return []
    m = pool.match_matrix
    if m.shape[0] != antigens.n:
        raise DimensionError(f"match matrix covers {m.shape[0]} antigens, got {antigens.n}")
    x = pool.concentrations
    y = np.asarray(antigens.concentrations)
    stimulation = cfg.k2 * (m * y[:, None]).sum(axis=0) * x
    if cfg.decay_mode == "proportional":
        decay = cfg.k3 * x
    else:
        decay = np.full_like(x, cfg.fixed_decay)
    x = np.clip(x + cfg.dt * (stimulation - decay), 0.0, cfg.saturation_cap)
    for ab, value in zip(pool.members, x):
        ab.concentration = float(value)
    return pool.remove_where(x < cfg.removal_floor)


class TraceEvent(NamedTuple):
    iteration: int
    antibody_id: Any
    concentration: float
    event: str  # enter | stay | removed


@dataclass
class IterationRecord:
    iteration: int
    members: tuple
    concentrations: tuple[float, ...]


@dataclass
class PoolResult:
    pool: ImmunePool
    events: list[TraceEvent] = field(default_factory=list)
    history: list[IterationRecord] = field(default_factory=list)
    stable: bool = False
    converged: bool = True
    stream_exhausted: bool = False
    iterations: int = 0

    @property
    def empty(self) -> bool:
        return len(self.pool) == 0


def run_to_stability(candidates: Iterable[Candidate], antigens: AntigenSet,
                     cfg: PoolConfig) -> PoolResult:
    """Fill the pool from ``candidates``, iterate, refill after drop-outs.

    Entrants start at ``initial_concentration``. The pool is declared
    stable once membership has been unchanged for ``stability_window``
    consecutive iterations during which no member's concentration fell;
    a member still decaying is on its way out, so its presence does not
    count as settled. The run also ends when the stream is exhausted and
    the pool is empty, or at ``max_iterations`` (``converged=False``).
    Removed candidates are never re-admitted.
    """
    stream = iter(candidates)
    pool = ImmunePool(cfg.capacity)
    result = PoolResult(pool)
    seen_any = False
    quiet = 0
    iteration = 0

    while True:
        entered = False
        while not pool.full and not result.stream_exhausted:
            try:
                cand = next(stream)
            except StopIteration:
                result.stream_exhausted = True
                break
            seen_any = True
            cand.antibody.concentration = cfg.initial_concentration
            pool.add(cand)
            entered = True
            result.events.append(TraceEvent(iteration + 1, cand.antibody.id,
                                            cfg.initial_concentration, "enter"))
        if not seen_any:
            raise EmptyPoolError("candidate stream is empty")
        if entered:
            quiet = 0
        if not len(pool) and result.stream_exhausted:
            break
        if quiet >= cfg.stability_window:
            result.stable = True
            break
        if iteration >= cfg.max_iterations:
            result.converged = False
            break

        iteration += 1
        before = {ab.id: ab.concentration for ab in pool}
        removed = _step(pool, antigens, cfg)
        fell = any(ab.concentration < before[ab.id] for ab in pool)
        for ab in removed:
            result.events.append(TraceEvent(iteration, ab.id, ab.concentration, "removed"))
        for ab in pool:
            result.events.append(TraceEvent(iteration, ab.id, ab.concentration, "stay"))
        result.history.append(IterationRecord(iteration, pool.ids, tuple(pool.concentrations)))
        quiet = 0 if (removed or fell) else quiet + 1

    result.iterations = iteration
    return result


def write_trace_csv(result: PoolResult, fh) -> None:
    """``iteration,antibody_id,concentration,event`` rows, one per event."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["iteration", "antibody_id", "concentration", "event"])
    for ev in result.events:
        writer.writerow([ev.iteration, ev.antibody_id, repr(float(ev.concentration)), ev.event])
