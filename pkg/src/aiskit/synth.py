"""Synthetic fixtures: planted-neighbourhood ratings and labelled packet logs."""

from __future__ import annotations

from ._rng import derive_rng
from .core import PacketSignature
from .ids import PacketLog

SERVICE_PORTS = (22, 25, 53, 80, 443)


def synth_ratings(users: int, items: int, clones: int, target: int, noise: float = 0.0,
                  seed: int = 0, density: float = 0.5) -> list[tuple[int, int, int]]:
    """Votes ``(user, item, score)`` with ``clones`` users planted near ``target``.

    The target votes on a third of the catalog. Each clone copies those
    votes, replacing each one independently with probability ``noise`` by a
    different score, and also votes on as many other items using a
    shuffled copy of the target's scores, so at ``noise=0`` a clone's mean
    equals the target's and their correlation is exactly 1. The remaining
    users vote at random on each item with probability ``density``.
    """
    if users < 2 or not 0 <= target < users:
        raise ValueError("need users >= 2 and 0 <= target < users")
    if not 0 <= clones < users:
        raise ValueError("clones must be in [0, users - 1]")
    if items < 6:
        raise ValueError("need at least 6 items")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    rng = derive_rng(seed, "synth.ratings")
    size = items // 3
    order = rng.permutation(items)
    liked = sorted(int(i) for i in order[:size])
    extra_pool = [int(i) for i in order[size:]]

    scores = rng.integers(0, 6, size=size)
    while len(set(scores.tolist())) < 2:
        scores = rng.integers(0, 6, size=size)
    target_votes = dict(zip(liked, (int(s) for s in scores)))

    others = [u for u in range(users) if u != target]
    clone_ids = set(int(u) for u in rng.choice(others, size=clones, replace=False)) if clones else set()

    votes = []
    for user in range(users):
        if user == target:
            mine = dict(target_votes)
        elif user in clone_ids:
            mine = {}
            for item, s in target_votes.items():
                if rng.random() < noise:
                    s = int(rng.choice([v for v in range(6) if v != s]))
                mine[item] = s
            extras = rng.choice(extra_pool, size=size, replace=False)
            for item, s in zip(extras, rng.permutation(scores)):
                mine[int(item)] = int(s)
        else:
            mine = {}
            for item in range(items):
                if rng.random() < density:
                    mine[item] = int(rng.integers(0, 6))
            if not mine:
                mine[int(rng.integers(items))] = int(rng.integers(0, 6))
        votes.extend((user, item, mine[item]) for item in sorted(mine))
    return votes


def _internal_packet(rng) -> PacketSignature:
    return PacketSignature(
        ("tcp", "udp")[int(rng.integers(2))],
        f"10.0.{int(rng.integers(0, 4))}.{int(rng.integers(1, 255))}",
        int(rng.integers(49152, 65536)),
        f"10.0.0.{int(rng.integers(1, 16))}",
        SERVICE_PORTS[int(rng.integers(len(SERVICE_PORTS)))],
    )


def _external_packet(rng) -> PacketSignature:
    first = int(rng.integers(11, 224))
    octets = [first] + [int(o) for o in rng.integers(0, 256, size=3)]
    return PacketSignature(
        ("tcp", "udp", "icmp")[int(rng.integers(3))],
        ".".join(map(str, octets)),
        int(rng.integers(0, 65536)),
        ".".join(str(int(o)) for o in rng.integers(0, 256, size=4)),
        int(rng.integers(0, 65536)),
    )


def synth_packets(self_count: int, anomalies: int, seed: int = 0) -> PacketLog:
    """Labelled log: ``self_count`` distinct internal packets plus
    ``anomalies`` external ones, shuffled together."""
    if self_count < 1 or anomalies < 0:
        raise ValueError("need self_count >= 1 and anomalies >= 0")
    rng = derive_rng(seed, "synth.packets")
    normal: dict[PacketSignature, None] = {}
    while len(normal) < self_count:
        normal[_internal_packet(rng)] = None
    odd: dict[PacketSignature, None] = {}
    while len(odd) < anomalies:
        pkt = _external_packet(rng)
        if pkt not in normal:
            odd[pkt] = None
    records = [(p, "self") for p in normal] + [(p, "nonself") for p in odd]
    order = rng.permutation(len(records))
    records = [records[i] for i in order]
    return PacketLog([r for r, _ in records], [lab for _, lab in records])
