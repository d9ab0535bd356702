"""Counter-based random streams.

Every draw in the package comes from a stream addressed by a master seed and a
tuple of stream ids, e.g. ``stream(seed, k)`` for the k-th i.i.d. draw or
``stream(seed, round, "order")`` for a groupwise shuffle.  Streams are
Philox4x64-10 generators:

* key   = (seed mod 2**64, (seed >> 64) mod 2**64)
* counter = (0, 0, lo, hi) where (lo, hi) is a 128-bit digest of the ids;
  numpy increments the counter before each block, so the first block is
  generated at (1, 0, lo, hi)

The digest folds each id through splitmix64.  Integers enter as their
two's-complement 64-bit value; strings enter through 64-bit FNV-1a of their
UTF-8 bytes, tagged so that ``"3"`` and ``3`` differ.  The two low counter
words are left for the generator itself, which gives each stream 2**128
blocks before it could run into a neighbour.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STR_TAG = 0x5851F42D4C957F2D


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def _id_word(item) -> int:
    if isinstance(item, (bool, np.bool_)):
        raise TypeError("stream ids must be ints or strings")
    if isinstance(item, (int, np.integer)):
        return int(item) & MASK64
    if isinstance(item, str):
        return fnv1a64(item.encode("utf-8")) ^ _STR_TAG
    raise TypeError(f"unsupported stream id {item!r}")


def stream_digest(ids: tuple) -> tuple[int, int]:
    """128-bit digest (lo, hi) of a stream-id tuple."""
    h = splitmix64(len(ids))
    for item in ids:
        h = splitmix64(h ^ _id_word(item))
    return h, splitmix64(h ^ _GOLDEN)


def _key(seed: int) -> np.ndarray:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.array([seed & MASK64, (seed >> 64) & MASK64], dtype=np.uint64)


def stream(seed: int, *ids) -> np.random.Generator:
    """Independent generator for (seed, *ids)."""
    lo, hi = stream_digest(ids)
    counter = np.array([0, 0, lo, hi], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=_key(seed)))


def derive_seed(seed: int, *ids) -> int:
    """A 63-bit child seed, used to key per-trial streams."""
    raw = stream(seed, "derive", *ids).bit_generator.random_raw()
    return int(raw) >> 1
