"""Counter-based keyed hashing used for edge weights and seed derivation.

All randomness in the package flows through splitmix64-style finalizers so
that every random quantity is a pure function of (seed, counter words) and
reproduces bit-identically across runs, machines and thread counts.
"""

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MASK = (1 << 64) - 1


def mix64(z):
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def hash_words(seed, *words):
    """Hash a seed together with integer counter words to one uint64.

    Each word may be a scalar or an array; arrays broadcast together.
    """
    h = mix64(np.uint64(seed & _MASK))
    for w in words:
        w = np.asarray(w)
        with np.errstate(over="ignore"):
            h = mix64((h + _GOLDEN) ^ w.astype(np.int64).view(np.uint64))
    return h


def uniform01(h):
    """Map uint64 hashes to uniforms in [0, 1) with 53-bit resolution."""
    return (np.asarray(h, dtype=np.uint64) >> np.uint64(11)) * (2.0 ** -53)


def derive_seed(master_seed, *indices):
    """Derive a child 64-bit seed from a master seed and index words.

    Used for per-trial seeding: growing the trial count never reshuffles
    the seeds of earlier trials.
    """
    return int(hash_words(master_seed, *indices))
