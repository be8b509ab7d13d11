"""aiskit: artificial immune system primitives and adapters."""

from .core import (
    AffinityConfig,
    BitPattern,
    Correlation,
    FeatureVector,
    PacketSignature,
    VoteProfile,
    euclidean_distance,
    hamming_similarity,
    longest_contiguous_match,
    packet_match,
    pearson,
    r_contiguous_match,
)
from .hypermutation import MutationConfig, hypermutate
from .immune_pool import (
    Antibody,
    AntigenSet,
    Candidate,
    ImmunePool,
    PoolConfig,
    run_to_stability,
    step,
)
from .negative_selection import (
    DetectorSet,
    GenerationConfig,
    SelfSet,
    censor,
    generate_detectors,
    monitor,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityConfig", "BitPattern", "Correlation", "FeatureVector", "PacketSignature",
    "VoteProfile", "euclidean_distance", "hamming_similarity", "longest_contiguous_match",
    "packet_match", "pearson", "r_contiguous_match", "MutationConfig", "hypermutate",
    "Antibody", "AntigenSet", "Candidate", "ImmunePool", "PoolConfig", "run_to_stability",
    "step", "DetectorSet", "GenerationConfig", "SelfSet", "censor", "generate_detectors",
    "monitor",
]
