"""Antigen/antibody encodings and the affinity measures defined on them.

Four encodings are supported:

* :class:`BitPattern` -- fixed-length binary strings such as ``10010``
* :class:`FeatureVector` -- real-valued feature strings
* :class:`VoteProfile` -- sparse ``item -> score`` maps (recommender users)
* :class:`PacketSignature` -- ``[proto src_ip src_port dst_ip dst_port]``
  tuples where any field may be a wildcard

All values are immutable; every function here is pure.
"""

from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import DimensionError, InvalidObservationError, NoOverlapError

PROTOCOLS = ("tcp", "udp", "icmp", "any")
MEASURES = ("hamming", "contiguous", "euclidean", "pearson")
WILDCARD = "*"


@dataclass(frozen=True)
class BitPattern:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("bit pattern must have length >= 1")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bit pattern contains non-binary symbols: {self.bits!r}")
        object.__setattr__(self, "bits", bits)
        # packed copy, position 0 is the most significant bit
        value = 0
        for b in bits:
            value = (value << 1) | b
        object.__setattr__(self, "_value", value)

    @classmethod
    def from_string(cls, text: str) -> "BitPattern":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitPattern":
        if value < 0 or value >= 1 << length:
            raise ValueError(f"{value} does not fit in {length} bits")
        return cls(tuple((value >> (length - 1 - i)) & 1 for i in range(length)))

    @property
    def value(self) -> int:
        return self._value

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("feature vector must have length >= 1")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("feature vector values must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=True)
class VoteProfile:
    """A user's votes as ``item_id -> score``.

    ``mean`` is taken over *all* votes of the user, which is what the
    correlation below uses as the centre for each user.
    """

    votes: Mapping[int, int]
    score_range: tuple[int, int] = (0, 5)

    def __post_init__(self):
        lo, hi = self.score_range
        clean = {}
        for item, score in dict(self.votes).items():
            item, score = int(item), int(score)
            if item < 0:
                raise ValueError(f"item id must be non-negative, got {item}")
            if not lo <= score <= hi:
                raise ValueError(f"score {score} for item {item} outside [{lo}, {hi}]")
            clean[item] = score
        object.__setattr__(self, "votes", clean)

    __hash__ = None  # votes is a dict

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], score_range=(0, 5)) -> "VoteProfile":
        votes = {}
        for item, score in pairs:
            if item in votes:
                raise ValueError(f"item {item} voted twice")
            votes[item] = score
        return cls(votes, score_range)

    @property
    def mean(self) -> float:
        if not self.votes:
            raise ValueError("mean of an empty vote profile")
        return sum(self.votes.values()) / len(self.votes)

    def __len__(self):
        return len(self.votes)

    def __contains__(self, item):
        return item in self.votes

    def __getitem__(self, item):
        return self.votes[item]


def _parse_ip(value) -> str | None:
    if value is None or value == WILDCARD:
        return None
    try:
        return str(ipaddress.IPv4Address(str(value).strip()))
    except ipaddress.AddressValueError as exc:
        raise ValueError(f"invalid IPv4 address {value!r}") from exc


def _parse_port(value) -> int | None:
    if value is None or value == WILDCARD:
        return None
    port = int(value)
    if not 0 <= port <= 65535:
        raise ValueError(f"port {port} outside [0, 65535]")
    return port


@dataclass(frozen=True)
class PacketSignature:
    """Five-field packet template; ``None`` (or protocol ``any``) is a wildcard."""

    protocol: str = "any"
    src_ip: str | None = None
    src_port: int | None = None
    dst_ip: str | None = None
    dst_port: int | None = None

    def __post_init__(self):
        proto = "any" if self.protocol in (None, WILDCARD) else str(self.protocol).lower()
        if proto not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        object.__setattr__(self, "protocol", proto)
        object.__setattr__(self, "src_ip", _parse_ip(self.src_ip))
        object.__setattr__(self, "dst_ip", _parse_ip(self.dst_ip))
        object.__setattr__(self, "src_port", _parse_port(self.src_port))
        object.__setattr__(self, "dst_port", _parse_port(self.dst_port))

    @classmethod
    def from_fields(cls, fields: Sequence[str]) -> "PacketSignature":
        if len(fields) != 5:
            raise ValueError(f"expected 5 packet fields, got {len(fields)}")
        return cls(*(f.strip() for f in fields))

    def fields(self) -> tuple:
        return (self.protocol, self.src_ip, self.src_port, self.dst_ip, self.dst_port)

    def to_fields(self) -> list[str]:
        """Text form with ``*`` for every wildcard (protocol ``any`` included)."""
        out = []
        for i, value in enumerate(self.fields()):
            if value is None or (i == 0 and value == "any"):
                out.append(WILDCARD)
            else:
                out.append(str(value))
        return out

    @property
    def is_concrete(self) -> bool:
        return self.protocol != "any" and all(v is not None for v in self.fields()[1:])

    def __str__(self):
        return "[" + " ".join(self.to_fields()) + "]"


@dataclass(frozen=True)
class AffinityConfig:
    measure: str = "hamming"
    pearson_overlap_threshold: int = 5
    contiguous_r: int = 1

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown affinity measure {self.measure!r}")
        if self.pearson_overlap_threshold < 1:
            raise ValueError("pearson_overlap_threshold must be a positive integer")
        if self.contiguous_r < 1:
            raise ValueError("contiguous_r must be a positive integer")


class Correlation(NamedTuple):
    r: float
    n: int
    degenerate: bool = False
    raw: float = 0.0


def _check_lengths(a, b):
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")


def _agreement(a: BitPattern, b: BitPattern) -> int:
    mask = (1 << len(a)) - 1
    return ~(a.value ^ b.value) & mask


def hamming_similarity(a: BitPattern, b: BitPattern) -> int:
    """Number of positions where ``a`` and ``b`` agree (``L - hamming distance``)."""
    _check_lengths(a, b)
    return len(a) - bin(a.value ^ b.value).count("1")


def longest_contiguous_match(a: BitPattern, b: BitPattern) -> int:
    """Length of the longest run of positions on which ``a`` and ``b`` agree."""
    _check_lengths(a, b)
    run = _agreement(a, b)
    length = 0
    while run:
        run &= run >> 1
        length += 1
    return length


def r_contiguous_match(a: BitPattern, b: BitPattern, r: int) -> bool:
    _check_lengths(a, b)
    if not 1 <= r <= len(a):
        raise ValueError(f"r must be in [1, {len(a)}], got {r}")
    run = _agreement(a, b)
    for _ in range(r - 1):
        run &= run >> 1
        if not run:
            return False
    return run != 0


def euclidean_distance(a: FeatureVector, b: FeatureVector) -> float:
    _check_lengths(a, b)
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a.values, b.values)))


def penalize(r: float, n: int, threshold: int) -> float:
    """Scale ``r`` by ``min(1, n / threshold)`` to discount small overlaps."""
    if n < threshold:
        return r * n / threshold
    return r


def pearson(u: VoteProfile, v: VoteProfile, cfg: AffinityConfig | None = None) -> Correlation:
    """Penalised Pearson correlation over the items both users voted on.

    Each user is centred on the mean of all of their votes, not only the
    overlapping ones. When either user's overlapping deviations are all zero
    the correlation is undefined; ``r = 0`` is returned with ``degenerate`` set.

    Raises :class:`NoOverlapError` when the users share no items.
    """
    cfg = cfg or AffinityConfig(measure="pearson")
    common = sorted(u.votes.keys() & v.votes.keys())
    n = len(common)
    if n == 0:
        raise NoOverlapError("profiles share no voted items")
    u_bar, v_bar = u.mean, v.mean
    num = su = sv = 0.0
    for item in common:
        du = u.votes[item] - u_bar
        dv = v.votes[item] - v_bar
        num += du * dv
        su += du * du
        sv += dv * dv
    if su == 0.0 or sv == 0.0:
        return Correlation(0.0, n, True, 0.0)
    raw = num / math.sqrt(su * sv)
    r = penalize(raw, n, cfg.pearson_overlap_threshold)
    return Correlation(min(1.0, max(-1.0, r)), n, False, raw)


def packet_match(det: PacketSignature, pkt: PacketSignature) -> bool:
    """True iff every field of ``det`` equals ``pkt``'s field or is a wildcard."""
    if not pkt.is_concrete:
        raise InvalidObservationError(f"observed packet {pkt} contains wildcards")
    if det.protocol != "any" and det.protocol != pkt.protocol:
        return False
    for d, p in zip(det.fields()[1:], pkt.fields()[1:]):
        if d is not None and d != p:
            return False
    return True


def affinity(a, b, cfg: AffinityConfig):
    """Dispatch to the measure named in ``cfg``.

    ``contiguous`` returns a boolean (r-contiguous match at ``cfg.contiguous_r``);
    ``pearson`` returns a :class:`Correlation`.
    """
    if cfg.measure == "hamming":
        return hamming_similarity(a, b)
    if cfg.measure == "contiguous":
        return r_contiguous_match(a, b, cfg.contiguous_r)
    if cfg.measure == "euclidean":
        return euclidean_distance(a, b)
    return pearson(a, b, cfg)
