import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fixtures import PLANTED_POOL, brute_force_top, planted_dataset
from aiskit.core import AffinityConfig, VoteProfile
from aiskit.errors import DataFormatError, NoDataError, NotFoundError
from aiskit.immune_pool import PoolConfig
from aiskit.recommender import (
    Neighbor,
    Neighborhood,
    RatingsDataset,
    affinity_of,
    build_neighborhood,
    predict,
    read_ratings,
    recommend,
)

CFG4 = AffinityConfig("pearson", pearson_overlap_threshold=4)


def hood(target, *neighbours):
    """neighbours: (user_id, concentration, r, votes)"""
    return Neighborhood(
        -1, target,
        [Neighbor(uid, c, r, False) for uid, c, r, _ in neighbours],
        {uid: VoteProfile(v) for uid, _, _, v in neighbours},
    )


# -- affinity ----------------------------------------------------------------

def test_affinity_examples():
    u = VoteProfile({1: 5, 2: 3, 3: 0, 4: 1})
    a = affinity_of(u, u, CFG4)
    assert a.m == pytest.approx(1.0) and a.r == pytest.approx(1.0)
    anti = affinity_of(VoteProfile({1: 5, 2: 5, 3: 0, 4: 0}), VoteProfile({1: 0, 2: 0, 3: 5, 4: 5}), CFG4)
    assert anti.m == pytest.approx(1.0) and anti.r == pytest.approx(-1.0)
    none = affinity_of(VoteProfile({1: 5}), VoteProfile({2: 5}))
    assert none.m == 0.0 and none.flagged


# -- neighbourhood -------------------------------------------------------------

def test_two_user_dataset():
    ds = RatingsDataset.from_votes([(0, 1, 5), (0, 2, 1), (0, 3, 4), (1, 1, 4), (1, 2, 0), (1, 3, 5)])
    h = build_neighborhood(0, ds, PoolConfig(capacity=1), AffinityConfig("pearson", pearson_overlap_threshold=1))
    assert [n.user_id for n in h.neighbors] == [1]
    assert h.neighbors[0].r > 0.5


def test_unknown_user():
    ds = RatingsDataset.from_votes([(0, 1, 5), (1, 1, 4)])
    with pytest.raises(NotFoundError):
        build_neighborhood(9, ds)


def test_zero_overlap_target_gets_empty_neighbourhood():
    ds = RatingsDataset.from_votes([(0, 100, 5), (0, 101, 2), (1, 1, 4), (2, 2, 3), (3, 1, 0)])
    h = build_neighborhood(0, ds, PoolConfig(capacity=2))
    assert h.empty and h.result.empty and h.result.stream_exhausted


@pytest.mark.parametrize("seed", range(5))
def test_planted_survivors_match_bruteforce(seed):
    ds = planted_dataset(seed)
    h = build_neighborhood(0, ds, PLANTED_POOL)
    assert h.result.stable
    assert sorted(n.user_id for n in h.neighbors) == brute_force_top(ds, 0, 5)
    assert all(abs(n.r) > 0 for n in h.neighbors)


def test_noisy_clones_survivors_are_clones():
    ds = planted_dataset(3, noise=0.1)
    h = build_neighborhood(0, ds, PoolConfig(capacity=5, k2=0.1, k3=0.07))
    clones = set(brute_force_top(ds, 0, 5))
    assert {n.user_id for n in h.neighbors} <= clones


# -- prediction --------------------------------------------------------------

def test_constant_offset_prediction():
    target = VoteProfile({1: 2, 2: 3})  # mean 2.5
    h = hood(target,
             (10, 1.0, 1.0, {5: 2, 9: 3, 7: 1}),        # mean 2, votes item 9 at mean + 1
             (11, 1.0, 1.0, {4: 1, 9: 3}),              # mean 2
             (12, 1.0, 1.0, {1: 2, 2: 3, 3: 3, 9: 4}))  # mean 3
    p = predict(target, 9, h)
    assert p.score == 2.5 + 1.0
    assert p.neighbors == 3


def test_single_neighbour_at_own_mean():
    target = VoteProfile({1: 1, 2: 4, 3: 4})
    h = hood(target, (5, 3.7, 1.0, {1: 1, 9: 3, 2: 5}))
    assert predict(target, 9, h).score == target.mean


def test_mixed_sign_prediction_matches_oracle():
    target_votes = {1: 4, 2: 2, 3: 5, 4: 3}
    nbrs = [
        (2.0, 0.8, {1: 5, 2: 1, 8: 4, 9: 2}),
        (1.5, -0.6, {1: 1, 3: 0, 8: 1, 7: 5}),
        (0.7, 0.3, {2: 3, 8: 5, 4: 2}),
    ]
    target = VoteProfile(target_votes)
    h = hood(target, *[(i, c, r, v) for i, (c, r, v) in enumerate(nbrs)])
    got = predict(target, 8, h)
    assert got.raw == pytest.approx(oracles.weighted_prediction(target_votes, nbrs, 8), abs=1e-12)
    # by hand: mean 3.5; deviations 1, -0.75, 5/3; weights 1.6, -0.9, 0.21
    assert got.score == pytest.approx(3.5 + (1.6 + 0.675 + 0.35) / 2.71, abs=1e-12)
    assert got.neighbors == 3


def test_prediction_is_clamped():
    target = VoteProfile({1: 5, 2: 5, 3: 4})
    h = hood(target, (1, 1.0, 1.0, {1: 0, 9: 5}))
    p = predict(target, 9, h)
    assert p.score == 5.0 and p.raw > 5.0


def test_no_neighbour_voted():
    target = VoteProfile({1: 3})
    with pytest.raises(NoDataError):
        predict(target, 9, hood(target, (1, 1.0, 1.0, {1: 4})))


@settings(max_examples=50)
@given(st.dictionaries(st.integers(0, 5), st.integers(0, 5), min_size=1),
       st.lists(st.tuples(st.floats(0.1, 100), st.floats(-1, 1).filter(lambda r: abs(r) > 1e-3),
                          st.dictionaries(st.integers(0, 8), st.integers(0, 5), min_size=1)),
                min_size=1, max_size=6))
def test_predictions_in_range(target_votes, nbrs):
    target = VoteProfile(target_votes)
    h = hood(target, *[(i, c, r, v) for i, (c, r, v) in enumerate(nbrs)])
    for item in range(9):
        try:
            p = predict(target, item, h)
        except NoDataError:
            assert not any(item in v for _, _, v in nbrs)
            continue
        assert 0.0 <= p.score <= 5.0


# -- recommend ---------------------------------------------------------------

def test_recommend_nothing_left():
    target = VoteProfile({1: 3, 2: 4})
    assert recommend(target, hood(target, (1, 1.0, 1.0, {1: 4, 2: 1})), 3) == []


def test_recommend_truncation_and_ties():
    target = VoteProfile({1: 3})
    h = hood(target, (1, 1.0, 1.0, {1: 3, 5: 3, 4: 3, 6: 5}))
    recs = recommend(target, h, 10)
    assert [p.item_id for p in recs] == [6, 4, 5]
    assert recs == sorted(recs, key=lambda p: (-p.score, p.item_id))
    assert [p.item_id for p in recommend(target, h, 1)] == [6]
    with pytest.raises(ValueError):
        recommend(target, h, 0)


def test_planted_favourite_ranks_first():
    base = {i: s for i, s in enumerate([5, 1, 4, 2, 0, 3, 5, 1])}
    votes = [(0, i, s) for i, s in base.items()]
    for clone in (2, 5, 9):
        votes += [(clone, i, s) for i, s in base.items()] + [(clone, 40, 5), (clone, 41, 1)]
    for other, pattern in ((1, [2, 2, 3, 0]), (3, [1, 4, 4, 4]), (4, [0, 5, 1, 3]), (6, [3, 3, 1, 2])):
        votes += [(other, 40 + j, s) for j, s in enumerate(pattern)] + [(other, 0, 2)]
    ds = RatingsDataset.from_votes(votes)
    h = build_neighborhood(0, ds, PoolConfig(capacity=3))
    recs = recommend(ds[0], h, 5, ds.catalog)
    assert recs[0].item_id == 40
    expected = {}
    nbrs = [(n.concentration, n.r, dict(ds[n.user_id].votes)) for n in h.neighbors]
    for item in ds.catalog - set(base):
        if any(item in v for _, _, v in nbrs):
            expected[item] = min(5.0, max(0.0, oracles.weighted_prediction(base, nbrs, item)))
    assert [p.item_id for p in recs] == sorted(expected, key=lambda i: (-expected[i], i))[:5]


def test_relabelling_users_preserves_predictions():
    ds = planted_dataset(1)
    relabel = {u: 1000 + 7 * u for u in ds.users}
    ds2 = RatingsDataset({relabel[u]: p for u, p in ds.profiles.items()})
    h1 = build_neighborhood(0, ds, PLANTED_POOL)
    h2 = build_neighborhood(relabel[0], ds2, PLANTED_POOL)
    r1 = recommend(ds[0], h1, 10, ds.catalog)
    r2 = recommend(ds2[relabel[0]], h2, 10, ds2.catalog)
    assert r1 == r2


def test_mean_voting_neighbours_predict_target_mean():
    target = VoteProfile({1: 0, 2: 5, 3: 2})
    h = hood(target, (1, 2.0, 0.9, {9: 2, 1: 1, 2: 3}), (2, 1.0, -0.4, {9: 4, 5: 4}))
    assert predict(target, 9, h).score == pytest.approx(target.mean, abs=1e-15)


# -- CSV ---------------------------------------------------------------------

def test_read_ratings(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("user_id,item_id,rating\n0,1,5\n0,2,3\n1,1,4\n")
    ds = read_ratings(path)
    assert ds.users == [0, 1] and ds.catalog == {1, 2}
    assert ds[0].votes == {1: 5, 2: 3}


@pytest.mark.parametrize("body, line", [
    ("user_id,item_id,rating\n0,1,5\n0,1,x\n", 3),
    ("user_id,item_id,rating\n0,1,9\n", 2),
    ("user_id,item_id,rating\n0,1,5\n0,1,4\n", 3),
    ('user_id,item_id,rating\n"0",1,5\n', 2),
    ("user_id,item_id,rating\n0,1\n", 2),
    ("user,item,rating\n0,1,5\n", 1),
])
def test_read_ratings_rejects_malformed(tmp_path, body, line):
    path = tmp_path / "r.csv"
    path.write_text(body)
    with pytest.raises(DataFormatError) as info:
        read_ratings(path)
    assert info.value.line == line
