"""Counter-based random streams.

All randomness in the package is derived from a single integer root seed.
A stream is identified by ``(seed, tag, *index)``: the tuple is hashed
through :class:`numpy.random.SeedSequence` into a 128-bit Philox key, and the
``i``-th draw of the stream is the ``i``-th Philox output under that key.
Because Philox is a counter-based generator, draw ``i`` is a pure function of
``(key, i)``. Unit ``i`` of a sample always receives draw ``i`` of each
purpose stream, no matter how the surrounding computation is ordered or split
across workers.

Purpose tags are plain strings mapped to integers with CRC-32, so adding a
new tag never shifts existing streams.
"""

from __future__ import annotations

import zlib

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

_OUTPUTS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter step
_INV_2_52 = 2.0**-52


def _tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    return seed


def stream_key(seed: int, tag: str, *index: int) -> np.ndarray:
    """128-bit Philox key for the stream ``(seed, tag, *index)``."""
    ss = SeedSequence(_check_seed(seed), spawn_key=(_tag_id(tag), *map(int, index)))
    return ss.generate_state(2, np.uint64)


def child_seed(seed: int, tag: str, *index: int) -> int:
    """Derive an independent 63-bit integer seed from a parent seed."""
    ss = SeedSequence(_check_seed(seed), spawn_key=(_tag_id(tag), *map(int, index)))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def raw(seed: int, tag: str, n: int, *index: int, block: int = 0) -> np.ndarray:
    """``n`` raw 64-bit words of a stream, starting at counter block ``block``.

    Word ``j`` of the result is stream output ``4 * block + j``.
    """
    bg = Philox(key=stream_key(seed, tag, *index), counter=[int(block), 0, 0, 0])
    return bg.random_raw(int(n))


def to_unit_interval(words: np.ndarray) -> np.ndarray:
    """Map raw words to doubles strictly inside (0, 1).

    The top 52 bits pick a cell of width 2**-52 and the draw is the cell
    midpoint, so the largest value is ``1 - 2**-53`` and never rounds to 1.
    """
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * _INV_2_52


def uniforms(seed: int, tag: str, n: int, *index: int) -> np.ndarray:
    return to_unit_interval(raw(seed, tag, n, *index))


def normals(seed: int, tag: str, n: int, *index: int) -> np.ndarray:
    """Standard normal draws by inversion, one stream output per draw."""
    return ndtri(uniforms(seed, tag, n, *index))


def replicate_uniforms(
    seed: int, tag: str, n_rep: int, width: int, *index: int, start: int = 0
) -> np.ndarray:
    """Uniforms for replicates ``start .. start + n_rep - 1``, one row each.

    Replicate ``b`` starts at counter block ``b * ceil(width / 4)``, so its
    row is identical whether computed alone or inside any larger batch.
    """
    stride = -(-int(width) // _OUTPUTS_PER_BLOCK)
    words = raw(seed, tag, n_rep * stride * _OUTPUTS_PER_BLOCK, *index, block=start * stride)
    words = words.reshape(n_rep, stride * _OUTPUTS_PER_BLOCK)[:, :width]
    return to_unit_interval(words)
