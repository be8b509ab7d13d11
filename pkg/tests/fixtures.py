"""Frozen fixtures shared by several test modules."""

from aiskit.core import BitPattern
from aiskit.negative_selection import SelfSet

# 16 fixed 8-bit self patterns; at r=3 exactly 64 of the 256 patterns are
# matched by none of them, so censoring has real work to do.
SELF16_STRINGS = (
    "00101001", "00101010", "00110001", "00110011",
    "01100001", "01100010", "01100011", "01101011",
    "01110000", "01111010", "10101010", "10110000",
    "10110001", "10111010", "11101011", "11111001",
)
SELF16 = SelfSet(tuple(BitPattern.from_string(s) for s in SELF16_STRINGS))
UNIVERSE8 = [BitPattern.from_int(v, 8) for v in range(256)]

from aiskit.immune_pool import PoolConfig
from aiskit.recommender import RatingsDataset, affinity_of
from aiskit.synth import synth_ratings

# Planted ratings fixture: 20 users, 5 zero-noise clones of user 0.
# k3/k2 = 0.95 is the growth threshold: only near-perfect neighbours grow.
PLANTED_POOL = PoolConfig(capacity=5, k2=0.1, k3=0.095)


def planted_dataset(seed=0, users=20, clones=5, noise=0.0):
    return RatingsDataset.from_votes(synth_ratings(users, 60, clones, 0, noise, seed))


def brute_force_top(dataset, target_id, k, cfg=None):
    """Rank every other user by |r| (ties by id) and keep the best k."""
    scores = {u: affinity_of(dataset[u], dataset[target_id], cfg).m
              for u in dataset.users if u != target_id}
    return sorted(sorted(scores, key=lambda u: (-scores[u], u))[:k])
