"""Negative selection: censor random detectors against self, then monitor.

Detectors are drawn at random, every one that matches a self item is
eliminated (or, optionally, hypermutated and re-censored), and the survivors
are used to flag non-self observations in a stream.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from ._rng import derive_rng
from .core import (
    BitPattern,
    PacketSignature,
    longest_contiguous_match,
    packet_match,
    r_contiguous_match,
)
from .errors import (
    BudgetExhaustedWarning,
    DataFormatError,
    DimensionError,
    EmptySelfError,
)
from .hypermutation import MutationConfig, mutate_shape, random_packet_field

SHAPES = ("bits", "packet")
PACKET_FIELDS = 5


class Verdict(enum.Enum):
    KEEP = "keep"
    ELIMINATE = "eliminate"


def shape_of(item) -> str:
    if isinstance(item, BitPattern):
        return "bits"
    if isinstance(item, PacketSignature):
        return "packet"
    raise DimensionError(f"unsupported detector shape {type(item).__name__}")


@dataclass(frozen=True)
class SelfSet:
    items: tuple
    shape: str = ""

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise EmptySelfError("self set must be non-empty")
        shapes = {shape_of(i) for i in items}
        if len(shapes) != 1:
            raise DimensionError("self set mixes bit patterns and packet signatures")
        shape = shapes.pop()
        if self.shape and self.shape != shape:
            raise DimensionError(f"self items are {shape}, tagged {self.shape}")
        if shape == "bits" and len({len(i) for i in items}) != 1:
            raise DimensionError("self bit patterns differ in length")
        if shape == "packet" and not all(i.is_concrete for i in items):
            raise DimensionError("self packets must be concrete")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "shape", shape)

    @property
    def length(self) -> int:
        return len(self.items[0]) if self.shape == "bits" else PACKET_FIELDS

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class GenerationConfig:
    target_count: int = 100
    max_candidates: int = 10_000
    rng_seed: int = 0
    mutate_on_match: bool = False
    max_mutation_retries: int = 3
    wildcard_prob: float = 0.5
    mutation: MutationConfig = field(default_factory=MutationConfig)

    def __post_init__(self):
        if self.target_count < 1:
            raise ValueError("target_count must be positive")
        if self.max_candidates < self.target_count:
            raise ValueError("max_candidates must be >= target_count")
        if self.max_mutation_retries < 1:
            raise ValueError("max_mutation_retries must be positive")
        if not 0.0 <= self.wildcard_prob <= 1.0:
            raise ValueError("wildcard_prob must be in [0, 1]")


@dataclass
class GenerationStats:
    tried: int = 0
    eliminated: int = 0
    mutated_kept: int = 0


@dataclass
class DetectorSet:
    detectors: list
    shape: str
    length: int
    r: int = 0
    stats: GenerationStats = field(default_factory=GenerationStats)
    warning: str | None = None

    @property
    def complete(self) -> bool:
        return self.warning is None

    def __len__(self):
        return len(self.detectors)

    def __iter__(self):
        return iter(self.detectors)

    def matches(self, detector, observation) -> bool:
        return detector_matches(detector, observation, self.r)


class Alert(NamedTuple):
    index: int
    detectors: tuple[int, ...]


def detector_matches(detector, observation, r: int) -> bool:
    if isinstance(detector, BitPattern):
        if not isinstance(observation, BitPattern):
            raise DimensionError("bit detector applied to a non-bit observation")
        return r_contiguous_match(detector, observation, r)
    if not isinstance(observation, PacketSignature):
        raise DimensionError("packet detector applied to a non-packet observation")
    return packet_match(detector, observation)


def _check_candidate(candidate, self_set: SelfSet, r):
    if shape_of(candidate) != self_set.shape:
        raise DimensionError(f"candidate is {shape_of(candidate)}, self set is {self_set.shape}")
    if self_set.shape == "bits":
        if len(candidate) != self_set.length:
            raise DimensionError(f"candidate length {len(candidate)} != {self_set.length}")
        if r is None or not 1 <= r <= self_set.length:
            raise ValueError(f"r must be in [1, {self_set.length}] for bit patterns")


def censor(candidate, self_set: SelfSet, r: int | None = None) -> Verdict:
    """Eliminate ``candidate`` if it matches any self item, else keep it."""
    _check_candidate(candidate, self_set, r)
    for s in self_set.items:
        if detector_matches(candidate, s, r):
            return Verdict.ELIMINATE
    return Verdict.KEEP


def match_strength(candidate, self_set: SelfSet) -> float:
    """Closest approach of ``candidate`` to self, normalised to [0, 1].

    Longest agreeing run over ``L`` for bits; for packets the fraction of
    fields that are wildcards or equal to the self item's field.
    """
    if self_set.shape == "bits":
        return max(longest_contiguous_match(candidate, s) for s in self_set) / self_set.length
    best = 0
    for s in self_set:
        hits = sum(1 for d, p in zip(candidate.fields(), s.fields())
                   if d is None or d == "any" or d == p)
        best = max(best, hits)
    return best / PACKET_FIELDS


def _random_candidate(self_set: SelfSet, cfg: GenerationConfig, rng):
    if self_set.shape == "bits":
        return BitPattern(tuple(int(b) for b in rng.integers(0, 2, size=self_set.length)))
    fields = [random_packet_field(i, rng, cfg.wildcard_prob) for i in range(PACKET_FIELDS)]
    return PacketSignature(*fields)


def generate_detectors(self_set: SelfSet, cfg: GenerationConfig, r: int | None = None) -> DetectorSet:
    """Draw random candidates and keep those that survive censoring.

    Stops at ``cfg.target_count`` detectors or after ``cfg.max_candidates``
    draws, whichever comes first. Running out of budget yields a partial set
    with ``warning`` populated and a :class:`BudgetExhaustedWarning`.
    Mutation retries do not count against the candidate budget.
    """
    if self_set.shape == "bits":
        if r is None or not 1 <= r <= self_set.length:
            raise ValueError(f"r must be in [1, {self_set.length}] for bit patterns")
    else:
        r = 0
    rng = derive_rng(cfg.rng_seed, "negative_selection.candidates")
    mut_rng = derive_rng(cfg.rng_seed, "negative_selection.mutation")
    stats = GenerationStats()
    detectors = []
    while len(detectors) < cfg.target_count and stats.tried < cfg.max_candidates:
        candidate = _random_candidate(self_set, cfg, rng)
        stats.tried += 1
        if censor(candidate, self_set, r) is Verdict.KEEP:
            detectors.append(candidate)
            continue
        if cfg.mutate_on_match:
            for _ in range(cfg.max_mutation_retries):
                strength = match_strength(candidate, self_set)
                candidate = mutate_shape(candidate, strength, cfg.mutation, mut_rng)
                if censor(candidate, self_set, r) is Verdict.KEEP:
                    detectors.append(candidate)
                    stats.mutated_kept += 1
                    break
            else:
                stats.eliminated += 1
        else:
            stats.eliminated += 1

    warning = None
    if len(detectors) < cfg.target_count:
        warning = (f"candidate budget of {cfg.max_candidates} exhausted with "
                   f"{len(detectors)}/{cfg.target_count} detectors")
        warnings.warn(warning, BudgetExhaustedWarning, stacklevel=2)
    return DetectorSet(detectors, self_set.shape, self_set.length, r, stats, warning)


def monitor(detectors: DetectorSet, stream: Iterable) -> list[Alert]:
    """One alert per observation matched by at least one detector."""
    alerts = []
    for t, obs in enumerate(stream):
        if shape_of(obs) != detectors.shape:
            raise DimensionError(f"observation {t} is {shape_of(obs)}, detectors are {detectors.shape}")
        if detectors.shape == "bits" and len(obs) != detectors.length:
            raise DimensionError(f"observation {t} has length {len(obs)}, expected {detectors.length}")
        hits = tuple(i for i, d in enumerate(detectors.detectors)
                     if detector_matches(d, obs, detectors.r))
        if hits:
            alerts.append(Alert(t, hits))
    return alerts


# -- persistence -----------------------------------------------------------

def dumps_detectors(ds: DetectorSet) -> str:
    lines = [f"shape={ds.shape} L={ds.length} r={ds.r}"]
    for d in ds.detectors:
        lines.append(str(d) if ds.shape == "bits" else ",".join(d.to_fields()))
    return "\n".join(lines) + "\n"


def loads_detectors(text: str, path=None) -> DetectorSet:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DataFormatError("empty detector file", path, 1)
    header = {}
    for token in lines[0].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise DataFormatError(f"bad header token {token!r}", path, 1)
        header[key] = value
    if set(header) != {"shape", "L", "r"} or header["shape"] not in SHAPES:
        raise DataFormatError(f"bad header {lines[0]!r}", path, 1)
    try:
        length, r = int(header["L"]), int(header["r"])
    except ValueError:
        raise DataFormatError(f"bad header {lines[0]!r}", path, 1) from None
    shape = header["shape"]
    detectors = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            if shape == "bits":
                d = BitPattern.from_string(line)
                if len(d) != length:
                    raise ValueError(f"detector length {len(d)} != L={length}")
            else:
                d = PacketSignature.from_fields(line.split(","))
        except ValueError as exc:
            raise DataFormatError(str(exc), path, lineno) from None
        detectors.append(d)
    if shape == "bits" and not 1 <= r <= length:
        raise DataFormatError(f"r={r} outside [1, {length}]", path, 1)
    return DetectorSet(detectors, shape, length, r)


def save_detectors(ds: DetectorSet, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps_detectors(ds))


def load_detectors(path) -> DetectorSet:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read detector file: {exc.strerror}", path) from None
    return loads_detectors(text, path)
