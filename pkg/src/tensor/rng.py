import numpy as np

# Stream ids for seed derivation; each consumer draws from its own stream.
STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_LATENT = 2
STREAM_EVAL_NOISE = 4
STREAM_ADVERSARY_INIT = 5


class Rng:
    """
    Seeded random number generator over numpy's PCG64 bit generator.

    Identical seeds give identical streams. ``derive`` creates an
    independent child stream that is a pure function of (seed, stream id).
    """

    def __init__(self, seed: int, stream: int = -1):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.stream = stream
        if stream < 0:
            sequence = np.random.SeedSequence(self.seed)
        else:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(stream,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def derive(self, stream: int) -> "Rng":
        """Independent stream keyed by ``stream``; does not advance this generator."""
        if stream < 0:
            raise ValueError("stream id must be non-negative")
        return Rng(self.seed, stream)

    def uniform(self, lo: float, hi: float, shape) -> np.ndarray:
        return self.generator.uniform(lo, hi, size=shape)

    def normal(self, mu: float, sigma: float, shape) -> np.ndarray:
        return self.generator.normal(mu, sigma, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream={self.stream})"
