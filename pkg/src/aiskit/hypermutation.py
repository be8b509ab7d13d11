"""Somatic hypermutation: affinity-scaled mutation operators per encoding."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._rng import derive_rng
from .core import BitPattern, FeatureVector, PacketSignature, VoteProfile
from .errors import UnsupportedMutationError

DIRECTIONS = ("affinity", "inverse")


@dataclass(frozen=True)
class MutationConfig:
    """How disruptive a mutation is.

    ``direction="affinity"`` makes closer matches mutate more; ``"inverse"``
    scales with ``1 - affinity`` instead. ``rate`` is the fraction of
    positions changed at full scale (bits, swaps, packet fields). Feature
    vectors move one component by ``max(floor, sigma * scale)``.
    """

    direction: str = "affinity"
    rate: float = 0.25
    sigma: float = 1.0
    floor: float = 0.01
    seed: int = 0
    wildcard_prob: float = 0.5

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must be in [0, 1]")
        if self.sigma < 0 or self.floor <= 0:
            raise ValueError("sigma must be >= 0 and floor > 0")
        if not 0.0 <= self.wildcard_prob <= 1.0:
            raise ValueError("wildcard_prob must be in [0, 1]")

    def scale(self, affinity: float) -> float:
        if not 0.0 <= affinity <= 1.0:
            raise ValueError(f"affinity must be normalised to [0, 1], got {affinity}")
        return affinity if self.direction == "affinity" else 1.0 - affinity


def change_count(length: int, scale: float, rate: float) -> int:
    """Number of positions to touch: ``round(scale * rate * length)``, at least one."""
    return max(1, min(length, int(round(scale * rate * length))))


def random_packet_field(index: int, rng: np.random.Generator, wildcard_prob: float):
    if rng.random() < wildcard_prob:
        return None
    if index == 0:
        return ("tcp", "udp", "icmp")[rng.integers(3)]
    if index in (1, 3):
        return ".".join(str(o) for o in rng.integers(0, 256, size=4))
    return int(rng.integers(0, 65536))


def mutate_shape(shape, affinity: float, cfg: MutationConfig, rng: np.random.Generator):
    """Return a mutated copy of ``shape``; at least one change is always made."""
    scale = cfg.scale(affinity)
    if isinstance(shape, VoteProfile):
        raise UnsupportedMutationError(
            "vote profiles are real users; mutating them would fabricate ratings"
        )
    if isinstance(shape, BitPattern):
        bits = list(shape.bits)
        k = change_count(len(bits), scale, cfg.rate)
        for pos in rng.choice(len(bits), size=k, replace=False):
            bits[pos] ^= 1
        return BitPattern(tuple(bits))
    if isinstance(shape, FeatureVector):
        values = list(shape.values)
        pos = int(rng.integers(len(values)))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        values[pos] += sign * max(cfg.floor, cfg.sigma * scale)
        return FeatureVector(tuple(values))
    if isinstance(shape, PacketSignature):
        fields = list(shape.fields())
        k = change_count(len(fields), scale, cfg.rate)
        for pos in sorted(rng.choice(len(fields), size=k, replace=False)):
            old = fields[pos]
            # resample until the field actually changes
            while True:
                new = random_packet_field(int(pos), rng, cfg.wildcard_prob)
                if pos == 0 and new is None:
                    new = "any"
                if new != old:
                    break
            fields[pos] = new
        return PacketSignature(*fields)
    if isinstance(shape, tuple):
        if len(shape) < 2:
            raise UnsupportedMutationError("cannot swap elements of a sequence shorter than 2")
        if len(set(shape)) < 2:
            raise UnsupportedMutationError("all elements are equal; no swap changes the order")
        items = list(shape)
        k = change_count(len(items), scale, cfg.rate)
        swaps = 0
        while swaps < k or tuple(items) == shape:
            i, j = rng.choice(len(items), size=2, replace=False)
            if items[i] != items[j]:
                items[i], items[j] = items[j], items[i]
                swaps += 1
        return tuple(items)
    raise UnsupportedMutationError(f"no mutation operator for {type(shape).__name__}")


def hypermutate(ab, affinity: float, cfg: MutationConfig, rng: np.random.Generator | None = None):
    """Mutate an antibody's shape with strength driven by ``affinity``.

    Bit patterns get ``change_count`` flips, feature vectors one perturbed
    component, ordered tuples element swaps, packet signatures resampled
    fields. Without an explicit ``rng`` the stream is derived from
    ``cfg.seed`` so the call is reproducible.
    """
    if rng is None:
        rng = derive_rng(cfg.seed, "hypermutate")
    return replace(ab, shape=mutate_shape(ab.shape, affinity, cfg, rng))
