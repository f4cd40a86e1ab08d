"""Counter-based random streams (Philox 4x32, 10 rounds).

Every stochastic element of a run is addressed by (seed, stream, epoch), so
draws depend only on those integers and never on execution order.  That is
what makes serial and parallel runs bit-identical: stream is typically a
point index, epoch an iteration count, and the generator is a pure function
of the triple.
"""
from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_LO32 = np.uint64(0xFFFFFFFF)
_TWO_NEG53 = 1.0 / 9007199254740992.0  # 2**-53


def philox4x32(key0, key1, c0, c1, c2, c3, rounds: int = 10):
    """Apply the Philox 4x32 block function to uint32 counter lanes.

    All six inputs are uint32 scalars or broadcastable arrays; returns the
    four output lanes as uint32 arrays.
    """
    k0 = np.uint32(key0) + np.zeros_like(c0, dtype=np.uint32)
    k1 = np.uint32(key1) + np.zeros_like(c0, dtype=np.uint32)
    x0 = np.asarray(c0, dtype=np.uint32).copy()
    x1 = np.asarray(c1, dtype=np.uint32).copy()
    x2 = np.asarray(c2, dtype=np.uint32).copy()
    x3 = np.asarray(c3, dtype=np.uint32).copy()
    for _ in range(rounds):
        p0 = x0.astype(np.uint64) * _M0
        p1 = x2.astype(np.uint64) * _M1
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = (p0 & _LO32).astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = (p1 & _LO32).astype(np.uint32)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return x0, x1, x2, x3


def _to_unit_interval(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """Combine two uint32 lanes into a float64 uniform over [0, 1)."""
    bits53 = (hi >> np.uint32(6)).astype(np.uint64) * np.uint64(1 << 27)
    bits53 += (lo >> np.uint32(5)).astype(np.uint64)
    return bits53.astype(np.float64) * _TWO_NEG53


def uniform_pairs(seed: int, streams, epoch: int = 0):
    """Two independent uniforms in [0, 1) per stream index.

    Returns (u, v) float64 arrays shaped like ``streams``.  The draw for a
    given (seed, stream, epoch) is a fixed constant.
    """
    s = np.asarray(streams, dtype=np.uint64)
    seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    epoch = np.uint64(epoch & 0xFFFFFFFFFFFFFFFF)
    x0, x1, x2, x3 = philox4x32(
        np.uint32(seed & _LO32),
        np.uint32(seed >> np.uint64(32)),
        (s & _LO32).astype(np.uint32),
        (s >> np.uint64(32)).astype(np.uint32),
        np.uint32(epoch & _LO32) + np.zeros_like(s, dtype=np.uint32),
        np.uint32(epoch >> np.uint64(32)) + np.zeros_like(s, dtype=np.uint32),
    )
    return _to_unit_interval(x0, x1), _to_unit_interval(x2, x3)


def uniform_pair(seed: int, stream: int, epoch: int = 0) -> tuple[float, float]:
    """Scalar convenience wrapper around :func:`uniform_pairs`."""
    u, v = uniform_pairs(seed, np.array([stream], dtype=np.uint64), epoch)
    return float(u[0]), float(v[0])


def generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Sequential generator for draws that are inherently ordered.

    Used for gate-noise rotations and measurement sampling, where the draw
    order is fixed by the gate or sample sequence itself.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
