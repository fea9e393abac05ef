"""Deterministic random-stream derivation.

Every simulation path owns a 64-bit seed derived from (master seed,
scenario index, path index) by a splitmix64 avalanche walk.  Within a
path, independent sub-streams for each purpose (climate noise per
variable, hazard events per hazard, macro shocks, premium estimation per
year, ...) are derived from the path seed plus string/int tags.  Results
are therefore reproducible bit-for-bit regardless of worker count or of
the order in which sub-streams are consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def mix64(x: int | np.ndarray) -> int | np.ndarray:
    """splitmix64 finalizer: a full-avalanche bijection on 64-bit words."""
    scalar = np.isscalar(x)
    with np.errstate(over="ignore"):
        z = (np.uint64(x) if scalar else x.astype(np.uint64)) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return int(z) if scalar else z


def _tag_to_word(tag: str | int) -> int:
    if isinstance(tag, str):
        # Stable across runs and platforms, unlike the builtin hash().
        return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "big")
    return int(tag) & 0xFFFFFFFFFFFFFFFF


def derive_seed(master_seed: int, *words: str | int) -> int:
    """Chain-mix a master seed with tag words into a new 64-bit seed."""
    state = mix64(master_seed & 0xFFFFFFFFFFFFFFFF)
    for word in words:
        state = mix64(state ^ _tag_to_word(word))
    return state


def derive_path_seed(master_seed: int, scenario_index: int, path_index: int) -> int:
    """Seed for one (scenario, path) simulation unit.

    Collision-resistant for any practical number of scenarios and paths:
    each input word passes through a splitmix64 avalanche step, so flipping
    any input bit flips each output bit with probability ~1/2.
    """
    if scenario_index < 0 or path_index < 0:
        raise ValueError("scenario_index and path_index must be >= 0")
    return derive_seed(master_seed, "path-unit", scenario_index, path_index)


def derive_path_seeds(master_seed: int, scenario_index: int, path_indices: np.ndarray) -> np.ndarray:
    """Vectorised `derive_path_seed` over an array of path indices."""
    state = derive_seed(master_seed, "path-unit", scenario_index)
    return mix64(np.uint64(state) ^ np.asarray(path_indices, dtype=np.uint64))


class RandomStreams:
    """Factory of independent, reproducible generators under one path seed.

    The generator returned by `child(*tags)` depends only on the path seed
    and the tags, never on how many other children were created or in what
    order.  Tags may be strings (hashed with blake2b) or integers.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF

    def child_seed(self, *tags: str | int) -> int:
        return derive_seed(self.seed, *tags)

    def child(self, *tags: str | int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.child_seed(*tags)))
