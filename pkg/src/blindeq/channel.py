"""
Rational IIR channel models and a 2x2 eigenvalue-spread analyzer.

The transfer function is stored as::

    H(z) = (b[0] + b[1] z^-1 + ... + b[P] z^-P) / (1 + a[1] z^-1 + ... + a[Q] z^-Q)

so the recursion is ``y(n) = sum_k b[k] x(n-k) - sum_k a[k] y(n-k)``.
Mind the sign: H1 = 1 / (1 - 0.9 z^-1) stores ``a = [-0.9]``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSignalError, InvalidInputError

MIN_EIGEN_SAMPLES = 1000


@dataclass
class ChannelModel:
    """Direct-form I IIR filter with persistent state.

    Attributes
    ----------
    feedforward : numpy.ndarray
        Numerator coefficients ``b[0..P]``.
    feedback : numpy.ndarray
        Denominator coefficients ``a[1..Q]`` (the leading 1 is implicit).
    """

    feedforward: np.ndarray
    feedback: np.ndarray
    name: str = ""
    _x_hist: list = field(default_factory=list, repr=False)
    _y_hist: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.feedforward = np.atleast_1d(np.asarray(self.feedforward, dtype=np.complex128))
        self.feedback = np.atleast_1d(np.asarray(self.feedback, dtype=np.complex128))
        if self.feedforward.size == 0:
            raise InvalidInputError("channel needs at least one feedforward coefficient")
        if not (np.all(np.isfinite(self.feedforward)) and np.all(np.isfinite(self.feedback))):
            raise InvalidInputError("channel coefficients must be finite")
        poles = self.poles()
        if poles.size and np.max(np.abs(poles)) >= 1.0:
            raise InvalidInputError(
                f"unstable channel: pole magnitude {np.max(np.abs(poles)):.6g} >= 1"
            )
        self.reset()

    def poles(self) -> np.ndarray:
        if self.feedback.size == 0 or not np.any(self.feedback):
            return np.zeros(0, dtype=np.complex128)
        return np.roots(np.concatenate(([1.0], self.feedback)))

    def reset(self):
        """Clear the filter memory."""
        self._x_hist = [0j] * (self.feedforward.size - 1)
        self._y_hist = [0j] * self.feedback.size

    def dc_gain(self) -> complex:
        return complex(self.feedforward.sum() / (1.0 + self.feedback.sum()))


def make_channel(b, a, name: str = "") -> ChannelModel:
    return ChannelModel(np.asarray(b), np.asarray(a), name=name)


def make_channel_h1() -> ChannelModel:
    """H1(z) = 1 / (1 - 0.9 z^-1), i.e. y(n) = x(n) + 0.9 y(n-1)."""
    return ChannelModel(np.array([1.0]), np.array([-0.9]), name="h1")


def make_channel_h2() -> ChannelModel:
    """H2(z) = 1 / (1 + 0.9 z^-1), i.e. y(n) = x(n) - 0.9 y(n-1)."""
    return ChannelModel(np.array([1.0]), np.array([0.9]), name="h2")


def channel_filter(model: ChannelModel, samples) -> np.ndarray:
    """Run ``samples`` through ``model``, continuing from its current state.

    Consecutive calls concatenate seamlessly: filtering ``u`` then ``v``
    gives the same output as filtering ``u + v`` once.
    """
    x = np.asarray(samples, dtype=np.complex128).ravel()
    b = [complex(c) for c in model.feedforward]
    a = [complex(c) for c in model.feedback]
    xh = list(model._x_hist)  # newest first
    yh = list(model._y_hist)
    out = np.empty(x.size, dtype=np.complex128)
    b0 = b[0]
    for n, xn in enumerate(x.tolist()):
        acc = b0 * xn
        for k in range(1, len(b)):
            acc += b[k] * xh[k - 1]
        for k in range(len(a)):
            acc -= a[k] * yh[k]
        out[n] = acc
        if xh:
            xh.pop()
            xh.insert(0, xn)
        if yh:
            yh.pop()
            yh.insert(0, acc)
    model._x_hist = xh
    model._y_hist = yh
    return out


@dataclass(frozen=True)
class EigenSpread:
    lambda_max: float
    lambda_min: float
    ratio: float


def autocorr_2(signal) -> tuple[float, complex]:
    """Biased lag-0 and lag-1 autocorrelation estimates.

    ``r0 = mean |x(n)|^2`` and ``r1 = sum_{n>=1} x(n) conj(x(n-1)) / L``.
    """
    x = np.asarray(signal, dtype=np.complex128).ravel()
    L = x.size
    r0 = float(np.vdot(x, x).real) / L
    r1 = complex(np.sum(x[1:] * np.conj(x[:-1]))) / L
    return r0, r1


def eigen_spread_2(signal) -> EigenSpread:
    """Eigenvalues of the 2x2 Hermitian Toeplitz autocorrelation matrix.

    For ``R = [[r0, r1], [conj(r1), r0]]`` the eigenvalues are
    ``r0 +/- |r1|``; the spread is their ratio.

    Raises
    ------
    InvalidInputError
        Fewer than 1000 samples.
    DegenerateSignalError
        The smaller eigenvalue is not positive.
    """
    x = np.asarray(signal, dtype=np.complex128).ravel()
    if x.size < MIN_EIGEN_SAMPLES:
        raise InvalidInputError(
            f"eigen spread needs at least {MIN_EIGEN_SAMPLES} samples, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("signal contains non-finite samples")
    r0, r1 = autocorr_2(x)
    lmax = r0 + abs(r1)
    lmin = r0 - abs(r1)
    if not lmin > 0.0:
        raise DegenerateSignalError(f"lambda_min = {lmin:.3g} is not positive")
    return EigenSpread(lmax, lmin, lmax / lmin)
