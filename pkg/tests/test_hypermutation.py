import pytest
from hypothesis import given, strategies as st

from aiskit.core import BitPattern, FeatureVector, PacketSignature, VoteProfile
from aiskit.errors import UnsupportedMutationError
from aiskit.hypermutation import MutationConfig, change_count, hypermutate
from aiskit.immune_pool import Antibody


def test_bit_flips_scale_with_affinity():
    ab = Antibody("a", BitPattern.from_string("00000000"))
    # rate * L * scale = 0.25 * 8 * 1.0 = 2 flips
    cfg = MutationConfig(direction="affinity", rate=0.25, seed=7)
    out = hypermutate(ab, 1.0, cfg)
    diff = sum(x != y for x, y in zip(out.shape.bits, ab.shape.bits))
    assert diff == 2
    assert out.id == "a" and out.concentration == ab.concentration


def test_zero_affinity_gives_single_change():
    ab = Antibody("a", BitPattern.from_string("10101010"))
    out = hypermutate(ab, 0.0, MutationConfig(direction="affinity", rate=1.0, seed=3))
    assert sum(x != y for x, y in zip(out.shape.bits, ab.shape.bits)) == 1


@given(st.floats(0, 1), st.integers(0, 2**32 - 1), st.sampled_from(["affinity", "inverse"]))
def test_always_at_least_one_change(aff, seed, direction):
    ab = Antibody(0, BitPattern.from_string("1100110011"))
    out = hypermutate(ab, aff, MutationConfig(direction=direction, seed=seed))
    assert out.shape != ab.shape


def test_feature_vector_perturbation_at_floor():
    ab = Antibody(0, FeatureVector((1.0, 2.0, 3.0)))
    cfg = MutationConfig(direction="inverse", sigma=0.5, floor=0.01, seed=11)
    out = hypermutate(ab, 1.0, cfg)
    deltas = [b - a for a, b in zip(ab.shape.values, out.shape.values)]
    changed = [d for d in deltas if d != 0]
    # magnitude = max(floor, sigma * (1 - 1.0)) = floor
    assert len(changed) == 1
    assert abs(changed[0]) == pytest.approx(0.01, abs=1e-15)


def test_feature_vector_perturbation_scales():
    ab = Antibody(0, FeatureVector((0.0, 0.0)))
    out = hypermutate(ab, 0.25, MutationConfig(direction="inverse", sigma=2.0, seed=1))
    assert max(abs(v) for v in out.shape.values) == pytest.approx(2.0 * 0.75)


def test_ordered_tuple_swaps():
    ab = Antibody(0, (1, 2, 3, 4, 5))
    out = hypermutate(ab, 0.5, MutationConfig(seed=2))
    assert sorted(out.shape) == [1, 2, 3, 4, 5]
    assert out.shape != ab.shape


def test_packet_fields_resampled():
    pkt = PacketSignature("tcp", "10.0.0.1", 1000, "10.0.0.2", 25)
    out = hypermutate(Antibody(0, pkt), 0.0, MutationConfig(seed=5))
    assert sum(a != b for a, b in zip(pkt.fields(), out.shape.fields())) == 1


def test_vote_profiles_cannot_mutate():
    with pytest.raises(UnsupportedMutationError):
        hypermutate(Antibody(0, VoteProfile({1: 3})), 0.5, MutationConfig())


def test_deterministic_under_seed():
    ab = Antibody(0, BitPattern.from_string("0" * 32))
    cfg = MutationConfig(seed=99)
    assert hypermutate(ab, 0.7, cfg) == hypermutate(ab, 0.7, cfg)


def test_change_count_bounds():
    assert change_count(8, 0.0, 0.25) == 1
    assert change_count(8, 1.0, 1.0) == 8
    with pytest.raises(ValueError):
        MutationConfig().scale(1.5)
