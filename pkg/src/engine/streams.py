"""Counter-based noise substreams keyed by (master_seed, trial_index, role)."""

import numpy as np
from scipy.special import ndtri

from data.models import NoiseStream, StreamRole

_TWO_POW_53 = float(2**53)


def make_stream(master_seed: int, trial_index: int, role: StreamRole) -> NoiseStream:
    return NoiseStream(master_seed=master_seed, trial_index=trial_index, role=role)


def generator(noise: NoiseStream) -> np.random.Generator:
    """
    Fresh Philox generator for one substream.

    The key is a pure function of the stream address, so a substream can be
    regenerated in any worker, in any order.
    """
    seq = np.random.SeedSequence(noise.master_seed, spawn_key=(noise.trial_index, noise.role.index))
    return np.random.Generator(np.random.Philox(seq))


def open_uniforms(gen: np.random.Generator, n: int) -> np.ndarray:
    """n uniforms in the open interval (0, 1), exactly one raw 64-bit draw each."""
    raw = gen.bit_generator.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO_POW_53


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """n standard Gaussians by inverse-CDF transform (no rejection step)."""
    return ndtri(open_uniforms(gen, n))


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of a sub-experiment (e.g. a sweep row) from its index."""
    state = np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1, np.uint64)
    return int(state[0])
