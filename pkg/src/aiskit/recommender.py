"""Film-recommendation adapter.

The target user is the single antigen, every other user a candidate
antibody whose match value is the magnitude of its penalised correlation
with the target. After the pool stabilises, surviving neighbours vote on
items, each weighted by ``concentration * r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .core import AffinityConfig, VoteProfile, pearson
from .errors import DataFormatError, NoDataError, NoOverlapError, NotFoundError
from .immune_pool import (
    Antibody,
    AntigenSet,
    Candidate,
    PoolConfig,
    PoolResult,
    run_to_stability,
)
from ._csvio import read_rows

SCORE_RANGE = (0, 5)
RECOMMENDER_POOL = PoolConfig(capacity=10, k2=0.1, k3=0.05, dt=1.0, stability_window=10)


@dataclass
class RatingsDataset:
    profiles: dict[int, VoteProfile]
    catalog: set[int] = field(default_factory=set)
    score_range: tuple[int, int] = SCORE_RANGE

    def __post_init__(self):
        for profile in self.profiles.values():
            self.catalog.update(profile.votes)

    @classmethod
    def from_votes(cls, votes: Iterable[tuple[int, int, int]], score_range=SCORE_RANGE):
        grouped: dict[int, dict[int, int]] = {}
        for user, item, score in votes:
            bucket = grouped.setdefault(int(user), {})
            if item in bucket:
                raise ValueError(f"user {user} voted twice on item {item}")
            bucket[int(item)] = int(score)
        return cls({u: VoteProfile(v, score_range) for u, v in grouped.items()},
                   score_range=score_range)

    def __getitem__(self, user_id) -> VoteProfile:
        try:
            return self.profiles[user_id]
        except KeyError:
            raise NotFoundError(f"unknown user {user_id}") from None

    def __contains__(self, user_id):
        return user_id in self.profiles

    @property
    def users(self) -> list[int]:
        return sorted(self.profiles)


class Affinity(NamedTuple):
    m: float
    r: float
    n: int
    flagged: bool


class Neighbor(NamedTuple):
    user_id: int
    concentration: float
    r: float
    degenerate: bool


@dataclass
class Neighborhood:
    target_id: int
    target: VoteProfile
    neighbors: list[Neighbor]
    profiles: dict[int, VoteProfile]
    result: PoolResult | None = None

    @property
    def empty(self) -> bool:
        return not self.neighbors


class Prediction(NamedTuple):
    item_id: int
    score: float
    raw: float
    neighbors: int
    degenerate: int


def affinity_of(candidate: VoteProfile, target: VoteProfile, cfg: AffinityConfig | None = None) -> Affinity:
    """Match value ``m = |r|`` plus the signed penalised correlation ``r``."""
    try:
        corr = pearson(candidate, target, cfg)
    except NoOverlapError:
        return Affinity(0.0, 0.0, 0, True)
    return Affinity(abs(corr.r), corr.r, corr.n, corr.degenerate)


def build_neighborhood(target_id: int, dataset: RatingsDataset, pool_cfg: PoolConfig = RECOMMENDER_POOL,
                       affinity_cfg: AffinityConfig | None = None) -> Neighborhood:
    """Stabilise a pool around ``target_id`` using all other users in id order."""
    target = dataset[target_id]
    scores = {}

    def stream():
        for uid in dataset.users:
            if uid == target_id:
                continue
            aff = affinity_of(dataset.profiles[uid], target, affinity_cfg)
            scores[uid] = aff
            yield Candidate(Antibody(uid, dataset.profiles[uid]), (aff.m,))

    result = run_to_stability(stream(), AntigenSet.single(target), pool_cfg)
    neighbors = [Neighbor(ab.id, ab.concentration, scores[ab.id].r, scores[ab.id].flagged)
                 for ab in result.pool]
    profiles = {n.user_id: dataset.profiles[n.user_id] for n in neighbors}
    return Neighborhood(target_id, target, neighbors, profiles, result)


def predict(target: VoteProfile, item: int, neighborhood: Neighborhood) -> Prediction:
    """Mean-offset weighted prediction of ``target``'s vote on ``item``.

    ``p = mean(target) + sum(w_i * (v_i - mean_i)) / sum(|w_i|)`` with
    ``w_i = concentration_i * r_i`` over neighbours who voted on ``item``;
    the returned score is clamped to the score range and ``raw`` is not.
    """
    num = den = 0.0
    used = degenerate = 0
    for nb in neighborhood.neighbors:
        profile = neighborhood.profiles[nb.user_id]
        if item not in profile:
            continue
        w = nb.concentration * nb.r
        num += w * (profile[item] - profile.mean)
        den += abs(w)
        used += 1
        degenerate += nb.degenerate
    if used == 0 or den == 0.0:
        raise NoDataError(f"no neighbour voted on item {item}")
    raw = target.mean + num / den
    lo, hi = target.score_range
    return Prediction(item, float(min(hi, max(lo, raw))), raw, used, degenerate)


def recommend(target: VoteProfile, neighborhood: Neighborhood, k: int,
              catalog: Iterable[int] | None = None) -> list[Prediction]:
    """Top-``k`` predictions over items the target has not voted on.

    Ties are broken by ascending item id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if catalog is None:
        catalog = set()
        for profile in neighborhood.profiles.values():
            catalog.update(profile.votes)
    preds = []
    for item in sorted(set(catalog) - set(target.votes)):
        try:
            preds.append(predict(target, item, neighborhood))
        except NoDataError:
            continue
    preds.sort(key=lambda p: (-p.score, p.item_id))
    return preds[:k]


# -- CSV -------------------------------------------------------------------

RATINGS_HEADER = ("user_id", "item_id", "rating")
PREDICTIONS_HEADER = ("user_id", "item_id", "prediction", "neighbors")


def read_ratings(path) -> RatingsDataset:
    """Parse ``user_id,item_id,rating`` rows; errors carry line numbers."""
    votes = []
    seen = set()
    lo, hi = SCORE_RANGE
    for lineno, row in read_rows(path, RATINGS_HEADER):
        try:
            user, item, score = (int(v) for v in row)
        except ValueError:
            raise DataFormatError(f"non-integer field in {row!r}", path, lineno) from None
        if user < 0 or item < 0:
            raise DataFormatError("ids must be non-negative", path, lineno)
        if not lo <= score <= hi:
            raise DataFormatError(f"rating {score} outside [{lo}, {hi}]", path, lineno)
        if (user, item) in seen:
            raise DataFormatError(f"duplicate vote for user {user} item {item}", path, lineno)
        seen.add((user, item))
        votes.append((user, item, score))
    return RatingsDataset.from_votes(votes)


def write_ratings(dataset_votes: Iterable[tuple[int, int, int]], fh) -> None:
    fh.write(",".join(RATINGS_HEADER) + "\n")
    for user, item, score in dataset_votes:
        fh.write(f"{user},{item},{score}\n")


def format_prediction(user_id: int, pred: Prediction) -> str:
    return f"{user_id},{pred.item_id},{pred.score!r},{pred.neighbors}"


def write_predictions(user_id: int, preds: Iterable[Prediction], fh) -> None:
    fh.write(",".join(PREDICTIONS_HEADER) + "\n")
    for p in preds:
        fh.write(format_prediction(user_id, p) + "\n")
