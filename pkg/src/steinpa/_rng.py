"""Counter-based random streams shared by the numba kernels.

Every replicate (or chain) draws from its own stream, identified by a 64-bit
key derived from ``(seed, *ids)``. The i-th draw of a stream is a pure
function of ``(key, i)`` (SplitMix64 finaliser applied to ``key + i * golden``),
so results never depend on execution order or thread count.

Kernels carry the stream as a length-2 ``uint64`` array ``[key, counter]``.
"""
import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def stream_key(seed, *ids):
    """Derive a 64-bit stream key from a seed and integer stream ids."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(i) for i in ids]
    return np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0]


def new_stream(seed, *ids):
    return np.array([stream_key(seed, *ids), 0], dtype=np.uint64)


def numpy_generator(seed, *ids):
    """A numpy ``Generator`` on a Philox stream keyed like the kernel streams."""
    return np.random.Generator(np.random.Philox(key=int(stream_key(seed, *ids))))


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def subkey(key, idx):
    """Key of a sub-stream ``idx`` of ``key`` (e.g. one lattice site)."""
    return mix64(key ^ mix64(np.uint64(idx) * _GOLDEN + _GOLDEN))


@njit(cache=True, inline="always")
def next_u64(st):
    c = st[1]
    st[1] = c + _ONE
    return mix64(st[0] + c * _GOLDEN)


@njit(cache=True, inline="always")
def next_uniform(st):
    """Uniform double on [0, 1)."""
    return float(next_u64(st) >> _S11) * _INV53


@njit(cache=True, inline="always")
def next_exponential(st, rate):
    return -math.log(1.0 - next_uniform(st)) / rate


@njit(cache=True, inline="always")
def next_index(st, n):
    """Uniform integer in [0, n)."""
    return int(next_uniform(st) * n)
