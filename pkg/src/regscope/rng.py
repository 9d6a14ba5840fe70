"""
SplitMix64 random source.

Every stochastic step in regscope (shuffles, bootstrap draws, feature
subsets, weight init, synthetic data) pulls from this generator so that a
seed reproduces the same artifacts bit for bit, independent of numpy's
own generator versions.

The generator is counter based: the k-th output (k = 1, 2, ...) of a
stream seeded with ``s`` is ``mix64(s + k * GAMMA)``.  That makes block
draws a single vectorised numpy expression.

Child streams are derived with ``derive_seed(seed, i) = mix64(seed + (i + 1) * GAMMA)``,
i.e. the i-th output of the parent stream, which is how per-tree,
per-class and per-node seeds are produced.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z):
    """Finaliser of SplitMix64 on a python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z):
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed, *path):
    """Fold a sequence of indices into ``seed``, one derivation per index."""
    s = int(seed) & MASK64
    for i in path:
        s = mix64(s + (int(i) + 1) * GAMMA)
    return s


class SplitMix64:
    """Sequential view over the counter-based stream."""

    def __init__(self, seed):
        self.seed = int(seed) & MASK64
        self.counter = 0

    def next_u64(self, n):
        """Next ``n`` raw 64-bit outputs as a uint64 array."""
        ks = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + ks * np.uint64(GAMMA)
            return _mix64_array(z)

    def uniform(self, n):
        """``n`` doubles in [0, 1) built from the top 53 bits."""
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))

    def integers(self, n, high):
        """``n`` integers in [0, high) by scaling uniforms (bias below 2**-53 * high)."""
        return np.minimum((self.uniform(n) * high).astype(np.int64), high - 1)

    def permutation(self, n):
        """A permutation of range(n): stable argsort of fresh uniform keys."""
        return np.argsort(self.uniform(n), kind="stable")
