"""
Replication seeds and per-source random streams.

derive_seed(master, index), all arithmetic mod 2**64:

    x = master + (index + 1) * 0x9E3779B97F4A7C15
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB
    seed = x ^ (x >> 31)

The gamma is odd, so distinct indices give distinct pre-images, and the
splitmix64 finalizer is a bijection on 64-bit words; derived seeds never
collide for one master seed, nor across master seeds for one index.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Independent sub-streams of one replication, in spawn order.
STREAMS = ("placement", "shadowing", "demand")


def _mix64(x):
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed, replication_index):
    x = (int(master_seed) + (int(replication_index) + 1) * GOLDEN_GAMMA) & MASK64
    return _mix64(x)


def replication_streams(seed):
    """{stream name: Generator}, each from its own SeedSequence child."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}
