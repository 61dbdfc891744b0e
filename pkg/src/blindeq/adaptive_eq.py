"""
FIR adaptive equalizer engine: LMS and the four CMA(p, q) variants.

Notation follows the usual stochastic-gradient form. With taps ``W`` and
delay line ``X = [x(n), x(n-1), ..., x(n-N+1)]`` the output is the plain
(unconjugated) inner product ``y = W^T X``. Updates are::

    LMS        W <- W + mu * e * conj(X),      e = d - y
    CMA(p, q)  W <- W - mu * K_pq(y) * conj(X)

where ``K_pq`` is the gradient kernel of the Godard dispersion cost
``| |y|^p - A^p |^q`` with every constant factor folded in:

=========  ===============================
(1, 1)     sign(|y| - A) * y / |y|
(1, 2)     2 (|y| - A) * y / |y|
(2, 1)     2 sign(|y|^2 - A^2) * y
(2, 2)     4 (|y|^2 - A^2) * y
=========  ===============================

All functions are pure: they return a new :class:`EqualizerState`.
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DivergenceError, InvalidInputError

# |y| below this makes the y/|y| kernels return 0
KERNEL_EPS = 1e-12


class KernelId(NamedTuple):
    p: int
    q: int


VALID_KERNELS = (KernelId(1, 1), KernelId(1, 2), KernelId(2, 1), KernelId(2, 2))


class Algorithm(str, Enum):
    LMS = "lms"
    CMA11 = "cma11"
    CMA12 = "cma12"
    CMA21 = "cma21"
    CMA22 = "cma22"

    @property
    def kernel(self) -> KernelId | None:
        if self is Algorithm.LMS:
            return None
        return KernelId(int(self.value[3]), int(self.value[4]))

    @property
    def is_blind(self) -> bool:
        return self is not Algorithm.LMS

    @property
    def label(self) -> str:
        if self is Algorithm.LMS:
            return "LMS"
        k = self.kernel
        return f"CMA({k.p},{k.q})"

    @classmethod
    def parse(cls, value) -> "Algorithm":
        """Accept ``"cma12"``, ``"CMA(1,2)"``, ``"cma-1-2"`` and similar."""
        if isinstance(value, cls):
            return value
        key = "".join(ch for ch in str(value).lower() if ch.isalnum())
        try:
            return cls(key)
        except ValueError:
            raise InvalidInputError(f"unknown algorithm {value!r}") from None


ALGORITHMS = tuple(Algorithm)


@dataclass(frozen=True)
class EqualizerState:
    """Taps, delay line and adaptation constants of one equalizer.

    ``delay_line`` holds the newest sample first. ``iteration`` counts the
    updates applied so far and is reported if an update diverges.
    """

    weights: np.ndarray
    delay_line: np.ndarray
    mu: float
    modulus: float = 1.0
    algorithm: Algorithm = Algorithm.LMS
    iteration: int = 0

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.complex128).ravel()
        x = np.array(self.delay_line, dtype=np.complex128).ravel()
        if w.size < 1 or w.size != x.size:
            raise InvalidInputError(
                f"weights and delay line must share length N >= 1 (got {w.size}, {x.size})"
            )
        if not self.mu >= 0.0:
            # mu = 0 is tolerated so a frozen equalizer can be simulated
            raise InvalidInputError(f"step size must be non-negative, got {self.mu}")
        if not self.modulus > 0.0:
            raise InvalidInputError(f"target modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "delay_line", x)
        object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))

    def _evolve(self, **changes) -> "EqualizerState":
        # validated fields only; skips __post_init__ on the per-sample path
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.__dict__.update(changes)
        return new

    @property
    def n_taps(self) -> int:
        return self.weights.size

    @classmethod
    def fresh(cls, n_taps, mu, algorithm=Algorithm.LMS, modulus=1.0, init=None):
        """New state with an empty delay line.

        ``init`` defaults to ``"zero"`` for LMS and ``"center_spike"`` for CMA.
        """
        algorithm = Algorithm.parse(algorithm)
        if init is None:
            init = "center_spike" if algorithm.is_blind else "zero"
        return cls(
            weights=init_weights(n_taps, init),
            delay_line=np.zeros(n_taps, dtype=np.complex128),
            mu=mu,
            modulus=modulus,
            algorithm=algorithm,
        )


def init_weights(n_taps: int, strategy: str = "zero") -> np.ndarray:
    """Initial tap vector.

    ``"zero"`` gives all zeros. ``"center_spike"`` sets tap ``n_taps // 2``
    to 1. Zero weights are a fixed point of every CMA update, which is why
    the blind equalizers start from the spike.
    """
    if n_taps < 1:
        raise InvalidInputError(f"need at least one tap, got {n_taps}")
    w = np.zeros(n_taps, dtype=np.complex128)
    if strategy == "center_spike":
        w[n_taps // 2] = 1.0
    elif strategy != "zero":
        raise InvalidInputError(f"unknown init strategy {strategy!r}")
    return w


def push_sample(state: EqualizerState, x: complex) -> EqualizerState:
    line = np.empty_like(state.delay_line)
    line[0] = x
    line[1:] = state.delay_line[:-1]
    return state._evolve(delay_line=line)


def equalizer_output(state: EqualizerState) -> complex:
    # W^T X, no conjugate on either side
    return complex(np.dot(state.weights, state.delay_line))


def _sign(v: float) -> float:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


def cma_kernel(kid, y: complex, A: float = 1.0) -> complex:
    """Error kernel ``K_pq(y)`` of the CMA(p, q) update.

    ``sign(0)`` is 0, and the two kernels that divide by ``|y|`` return 0
    when ``|y| < 1e-12``.
    """
    kid = KernelId(*kid)
    if kid not in VALID_KERNELS:
        raise InvalidInputError(f"unsupported CMA kernel {tuple(kid)}")
    if not A > 0.0:
        raise InvalidInputError(f"target modulus must be positive, got {A}")
    y = complex(y)
    r = abs(y)
    if kid.p == 1:
        if r < KERNEL_EPS:
            return 0j
        unit = y / r
        if kid.q == 1:
            return _sign(r - A) * unit
        return 2.0 * (r - A) * unit
    r2 = y.real * y.real + y.imag * y.imag
    if kid.q == 1:
        return 2.0 * _sign(r2 - A * A) * y
    return 4.0 * (r2 - A * A) * y


def dispersion_error_sq(kid, y: complex, A: float = 1.0) -> float:
    """Instantaneous ``(|y|^p - A^p)^2``, the quantity CMA(p, q) disperses."""
    r = abs(y)
    if KernelId(*kid).p == 2:
        d = r * r - A * A
    else:
        d = r - A
    return d * d  # float ** raises on overflow, * gives inf


def _checked(state: EqualizerState, weights: np.ndarray) -> EqualizerState:
    if not np.all(np.isfinite(weights)):
        raise DivergenceError(state.iteration, state.algorithm.label)
    return state._evolve(weights=weights, iteration=state.iteration + 1)


def cma_update(state: EqualizerState, kid=None) -> tuple[EqualizerState, complex]:
    """One CMA(p, q) step on the current delay line.

    Returns
    -------
    (EqualizerState, complex)
        Updated state and the pre-update output ``y``.

    Raises
    ------
    DivergenceError
        If any updated weight is non-finite.
    """
    own = state.algorithm.kernel
    if own is None:
        raise InvalidInputError("cma_update called on an LMS equalizer")
    if kid is None:
        kid = own
    elif KernelId(*kid) != own:
        raise InvalidInputError(f"kernel {tuple(kid)} does not match {state.algorithm.label}")
    y = equalizer_output(state)
    try:
        K = cma_kernel(kid, y, state.modulus)
    except OverflowError:
        raise DivergenceError(state.iteration, state.algorithm.label) from None
    w = state.weights - (state.mu * K) * np.conj(state.delay_line)
    return _checked(state, w), y


def lms_update(state: EqualizerState, desired: complex) -> tuple[EqualizerState, complex, complex]:
    """One trained LMS step; returns ``(state, y, e)`` with ``e = desired - y``."""
    y = equalizer_output(state)
    e = complex(desired) - y
    w = state.weights + (state.mu * e) * np.conj(state.delay_line)
    return _checked(state, w), y, e


def rule_of_thumb_step(n_taps: int, received_power: float) -> float:
    """Step size ``1 / (5 (2N + 1) P_R)``."""
    if not (n_taps >= 1 and received_power > 0.0):
        raise InvalidInputError(
            f"need N >= 1 and P_R > 0, got N={n_taps}, P_R={received_power}"
        )
    if isinstance(n_taps, float) and not n_taps.is_integer():
        raise InvalidInputError(f"N must be an integer, got {n_taps}")
    return 1.0 / (5.0 * (2 * n_taps + 1) * received_power)


def received_power(signal) -> float:
    x = np.asarray(signal, dtype=np.complex128)
    return float(np.mean(x.real ** 2 + x.imag ** 2))

