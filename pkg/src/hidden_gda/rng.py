"""SplitMix64 pseudo-random numbers for reproducible seeded initializations.

The generator state is a 64-bit integer.  Each draw adds the golden-ratio
increment ``0x9E3779B97F4A7C15`` and scrambles the result::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

(all arithmetic mod 2**64).  Uniform doubles take the top 53 bits:
``(z >> 11) * 2**-53``.  The sequence is fully specified so other
implementations can reproduce the same seeds.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed):
        seed = int(seed)
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, low=0.0, high=1.0):
        """A double in ``[low, high)``."""
        return low + (high - low) * ((self.next_u64() >> 11) * 2.0**-53)

    def uniform_array(self, low, high, n):
        return [self.uniform(low, high) for _ in range(n)]
