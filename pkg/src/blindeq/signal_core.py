"""
QPSK mapping and a deterministic Gaussian noise source.

Every random quantity in the package is drawn from :class:`NoiseSource`.
The generator is fixed so that golden values are reproducible:

* uniforms are 53-bit doubles in ``[0, 1)`` produced by numpy's ``PCG64``
  bit generator (``Generator.random``), seeded through
  ``SeedSequence([seed, stream])``;
* standard normals come from the Box-Muller transform applied to
  consecutive uniform pairs ``(u1, u2)``::

      r  = sqrt(-2 ln(1 - u1))
      g0 = r cos(2 pi u2)
      g1 = r sin(2 pi u2)

  ``1 - u1`` lies in ``(0, 1]`` so the logarithm is always finite.

The ``stream`` number separates the transmitted-data stream from the noise
stream of the same seed, which keeps data and noise independent.
"""

import math

import numpy as np

from .errors import InvalidInputError

INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Gray map indexed by 2*b0 + b1: 00, 01, 10, 11
QPSK_ALPHABET = np.array(
    [1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j], dtype=np.complex128
) * INV_SQRT2

DATA_STREAM = 0
NOISE_STREAM = 1

_SEED_MASK = (1 << 64) - 1


class NoiseSource:
    """Seeded uniform / Gaussian / bit generator.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    stream : int
        Independent sub-stream index for the same seed.
    """

    def __init__(self, seed: int = 0, stream: int = NOISE_STREAM):
        self.seed = int(seed) & _SEED_MASK
        self.stream = int(stream)
        seq = np.random.SeedSequence([self.seed, self.stream])
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"NoiseSource(seed={self.seed}, stream={self.stream})"

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def gaussians(self, n_pairs: int) -> np.ndarray:
        """Return ``n_pairs`` Box-Muller pairs as an ``(n_pairs, 2)`` array.

        Drawing ``k`` pairs at once consumes the stream exactly like ``k``
        successive :func:`gaussian_pair` calls.
        """
        u = self._gen.random(2 * n_pairs).reshape(n_pairs, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * np.pi * u[:, 1]
        return np.column_stack((r * np.cos(theta), r * np.sin(theta)))

    def bits(self, n: int) -> np.ndarray:
        """Fair bits, one uniform per bit (``u >= 0.5`` gives 1)."""
        return (self._gen.random(n) >= 0.5).astype(np.uint8)


def gaussian_pair(src: NoiseSource) -> tuple[float, float]:
    """Two independent N(0, 1) deviates; advances ``src`` by two uniforms."""
    g = src.gaussians(1)[0]
    return float(g[0]), float(g[1])


def qpsk_modulate(bits) -> np.ndarray:
    """Map a bit sequence onto unit-modulus Gray-coded QPSK symbols.

    Bits are consumed in pairs ``(b0, b1)``::

        00 -> (+1 + j)/sqrt(2)    01 -> (-1 + j)/sqrt(2)
        11 -> (-1 - j)/sqrt(2)    10 -> (+1 - j)/sqrt(2)

    Parameters
    ----------
    bits : array_like of {0, 1}
        Flat bit sequence of even length.

    Returns
    -------
    numpy.ndarray of complex128
        ``len(bits) // 2`` symbols.
    """
    b = np.asarray(bits, dtype=np.int64).ravel()
    if b.size % 2:
        raise InvalidInputError(f"QPSK needs an even number of bits, got {b.size}")
    if b.size and (b.min() < 0 or b.max() > 1):
        raise InvalidInputError("bits must be 0 or 1")
    return QPSK_ALPHABET[2 * b[0::2] + b[1::2]]


def qpsk_demodulate(s: complex) -> tuple[int, int]:
    """Hard decision on one sample; returns the bit pair ``(b0, b1)``.

    The nearest QPSK point is the one in the sample's quadrant. A zero
    coordinate counts as positive.
    """
    s = complex(s)
    return int(s.imag < 0.0), int(s.real < 0.0)


def qpsk_demodulate_many(samples) -> np.ndarray:
    """Vectorised :func:`qpsk_demodulate`; returns a flat bit array."""
    z = np.asarray(samples, dtype=np.complex128).ravel()
    out = np.empty(2 * z.size, dtype=np.uint8)
    out[0::2] = z.imag < 0.0
    out[1::2] = z.real < 0.0
    return out


def add_awgn(signal, variance: float, src: NoiseSource) -> np.ndarray:
    """Add circularly-symmetric complex white Gaussian noise.

    ``variance`` is the total complex variance ``E|w|^2``; the real and
    imaginary parts each get ``variance / 2``.
    """
    if not variance >= 0.0:
        raise InvalidInputError(f"noise variance must be >= 0, got {variance}")
    x = np.asarray(signal, dtype=np.complex128)
    if variance == 0.0:
        return x.copy()
    g = src.gaussians(x.size)
    w = math.sqrt(variance / 2.0) * (g[:, 0] + 1j * g[:, 1])
    return x + w.reshape(x.shape)
