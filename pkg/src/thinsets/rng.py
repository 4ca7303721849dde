"""Counter-based random numbers.

Selector draws are a pure function of ``(seed, stream, index)`` so that a
sampled set does not depend on the order in which indices are visited, and
sets built from different schedules with the same seed are coupled through
shared uniforms.  Bulk draws for Monte Carlo trials use numpy's Philox
generator keyed by ``(seed, trial)``; both are platform stable.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _key(seed, stream):
    s = np.array([int(seed) & _MASK64], dtype=np.uint64)
    t = np.array([int(stream) & _MASK64], dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(_mix(s) ^ _mix(t * _GOLDEN + _GOLDEN))[0]


def uniforms(seed, indices, stream=0):
    """Uniform draws in [0, 1) attached to integer ``indices``.

    Parameters
    ----------
    seed : int
        Any Python integer; reduced modulo 2**64.
    indices : array_like of int
        Non-negative indices (e.g. selector positions).
    stream : int
        Independent stream identifier (e.g. 1 for a second selector family).
    """
    idx = np.asarray(indices, dtype=np.int64).astype(np.uint64)
    key = _key(seed, stream)
    with np.errstate(over="ignore"):
        h = _mix(key ^ _mix(idx * _GOLDEN + np.uint64(1)))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def trial_seed(seed, trial):
    """Derive the seed of Monte Carlo trial ``trial`` from a master seed."""
    return int(_key(seed, (int(trial) << 1) | 1))


def trial_generator(seed, trial):
    """A numpy Generator for one Monte Carlo trial, keyed by ``(seed, trial)``."""
    key = np.array([int(seed) & _MASK64, int(trial) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
