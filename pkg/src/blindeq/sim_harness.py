"""
End-to-end equalization experiments and the algorithm comparison table.

The pipeline for one run is::

    seeded bits -> QPSK -> channel (H1 or H2) -> AWGN -> adaptive equalizer

LMS is trained on the transmitted symbols delayed by ``train_delay``.
CMA never sees them; its output is compared with the transmitted sequence
only afterwards, through :func:`align_phase_delay`, which removes the
delay and the 90-degree rotation ambiguity that blind equalization leaves.
"""

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .adaptive_eq import (
    ALGORITHMS,
    Algorithm,
    EqualizerState,
    cma_update,
    dispersion_error_sq,
    lms_update,
    push_sample,
)
from .channel import channel_filter, make_channel_h1, make_channel_h2
from .errors import DivergenceError, InvalidInputError, MetricError
from .signal_core import DATA_STREAM, NOISE_STREAM, NoiseSource, add_awgn, qpsk_modulate

log = logging.getLogger(__name__)

LMS_DEFAULTS = {"eq_length": 8, "step": 0.007}
CMA_DEFAULTS = {"eq_length": 2, "step": 0.001}
ROTATIONS = (1 + 0j, 1j, -1 + 0j, -1j)

# smoothed power is floored here before dB conversion (-300 dB)
POWER_FLOOR = 1e-30
STEADY_FRACTION = 0.1
CONVERGENCE_MARGIN_DB = 3.0

_CHANNELS = {"h1": make_channel_h1, "h2": make_channel_h2}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one run.

    ``eq_length`` and ``step`` default per algorithm (LMS 8 / 0.007,
    CMA 2 / 0.001). ``init`` overrides the weight initialisation strategy
    (``"zero"`` or ``"center_spike"``); ``None`` picks the algorithm's default.
    ``max_delay`` bounds the alignment search and defaults to ``eq_length + 2``.
    """

    channel: str = "h1"
    algorithm: Algorithm = Algorithm.LMS
    n_symbols: int = 20000
    eq_length: int | None = None
    step: float | None = None
    noise_variance: float = 1e-6
    seed: int = 0
    train_delay: int = 0
    smoothing_window: int = 200
    modulus: float = 1.0
    init: str | None = None
    max_delay: int | None = None

    def __post_init__(self):
        alg = Algorithm.parse(self.algorithm)
        object.__setattr__(self, "algorithm", alg)
        ch = str(self.channel).lower()
        if ch not in _CHANNELS:
            raise InvalidInputError(f"unknown channel {self.channel!r} (expected h1 or h2)")
        object.__setattr__(self, "channel", ch)
        defaults = CMA_DEFAULTS if alg.is_blind else LMS_DEFAULTS
        if self.eq_length is None:
            object.__setattr__(self, "eq_length", defaults["eq_length"])
        if self.step is None:
            object.__setattr__(self, "step", defaults["step"])
        if self.max_delay is None:
            object.__setattr__(self, "max_delay", self.eq_length + 2)
        self._validate()

    def _validate(self):
        checks = [
            (self.n_symbols >= 1, "n_symbols must be positive"),
            (self.eq_length >= 1, "eq_length must be positive"),
            (self.step > 0.0, "step must be positive"),
            (self.noise_variance >= 0.0, "noise_variance must be >= 0"),
            (self.train_delay >= 0, "train_delay must be >= 0"),
            (self.smoothing_window >= 1, "smoothing_window must be positive"),
            (self.modulus > 0.0, "modulus must be positive"),
            (self.max_delay >= 0, "max_delay must be >= 0"),
            (self.init in (None, "zero", "center_spike"), f"unknown init {self.init!r}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidInputError(msg)
        for f in ("step", "noise_variance", "modulus"):
            if not math.isfinite(getattr(self, f)):
                raise InvalidInputError(f"{f} must be finite")

    def with_algorithm(self, algorithm) -> "ExperimentConfig":
        """Same config for another algorithm, with that algorithm's defaults."""
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(algorithm=Algorithm.parse(algorithm), eq_length=None, step=None, max_delay=None)
        return ExperimentConfig(**kw)


@dataclass(frozen=True)
class Alignment:
    delay: int
    phase: complex
    aligned_err_sq: np.ndarray = field(repr=False)


@dataclass
class RunRecord:
    """Everything one run produced.

    ``err_sq`` is the algorithm's native error: ``|d - y|^2`` for LMS and
    the dispersion ``(|y|^p - A^p)^2`` for CMA(p, q). For CMA,
    ``aligned_err_sq`` is ``|c y(n) - s(n - delay)|^2`` under the best
    alignment. Smoothed curves hold NaN before the first full window.
    """

    config: ExperimentConfig
    transmitted: np.ndarray
    received: np.ndarray
    equalized: np.ndarray
    err_sq: np.ndarray
    err_db_smoothed: np.ndarray
    final_weights: np.ndarray
    aligned_err_sq: np.ndarray | None = None
    aligned_db_smoothed: np.ndarray | None = None
    alignment: Alignment | None = None
    diverged: bool = False
    diverged_at: int | None = None

    @property
    def metric_db_smoothed(self) -> np.ndarray:
        """Curve the comparison metrics use: aligned for CMA, training for LMS."""
        if self.aligned_db_smoothed is not None:
            return self.aligned_db_smoothed
        return self.err_db_smoothed


@dataclass(frozen=True)
class Metrics:
    steady_state_db: float
    conv_iteration: int


@dataclass(frozen=True)
class TableRow:
    algorithm: Algorithm
    steady_state_db: float
    conv_iteration: int
    diverged: bool


@dataclass
class ComparisonTable:
    channel: str
    seed: int
    rows: list

    def __getitem__(self, algorithm) -> TableRow:
        alg = Algorithm.parse(algorithm)
        for row in self.rows:
            if row.algorithm is alg:
                return row
        raise KeyError(algorithm)

    def best(self, candidates=ALGORITHMS) -> Algorithm:
        """Algorithm with the lowest steady-state dB among ``candidates``."""
        rows = [self[a] for a in candidates if not self[a].diverged]
        if not rows:
            raise MetricError("every candidate diverged")
        return min(rows, key=lambda r: r.steady_state_db).algorithm

    def to_text(self) -> str:
        head = f"{'algorithm':<10} {'steady_state_db':>16} {'conv_iteration':>15} {'diverged':>9}"
        lines = [f"channel={self.channel} seed={self.seed}", head, "-" * len(head)]
        for r in self.rows:
            db = "nan" if r.diverged else f"{r.steady_state_db:.2f}"
            lines.append(
                f"{r.algorithm.label:<10} {db:>16} {r.conv_iteration:>15d} {str(r.diverged).lower():>9}"
            )
        return "\n".join(lines)


def smooth_db(err_sq, window: int) -> np.ndarray:
    """Sliding-window mean of ``err_sq`` in dB.

    ``out[n]`` averages ``err_sq[n - window + 1 .. n]``; earlier entries are NaN.
    """
    e = np.asarray(err_sq, dtype=np.float64)
    out = np.full(e.size, np.nan)
    if window < 1:
        raise InvalidInputError("window must be positive")
    if e.size < window:
        return out
    if window == 1:
        power = e.copy()
    else:
        power = sliding_window_view(e, window).mean(axis=1)
    with np.errstate(invalid="ignore"):
        out[window - 1:] = 10.0 * np.log10(np.maximum(power, POWER_FLOOR))
    return out


def transmitted_symbols(n_symbols: int, seed: int) -> np.ndarray:
    """QPSK data for a run; drawn from the data stream of ``seed``."""
    bits = NoiseSource(seed, DATA_STREAM).bits(2 * n_symbols)
    return qpsk_modulate(bits)


def _delayed(s: np.ndarray, delay: int) -> np.ndarray:
    """``s(n - delay)`` with zeros before the start."""
    if delay == 0:
        return s
    out = np.zeros_like(s)
    if delay < s.size:
        out[delay:] = s[: s.size - delay]
    return out


def align_phase_delay(equalized, transmitted, max_delay: int) -> Alignment:
    """Best delay and QPSK rotation mapping ``equalized`` onto ``transmitted``.

    Every ``delay`` in ``[0, max_delay]`` and rotation ``c`` in
    ``(1, j, -1, -j)`` is scored by the mean of ``|c y(n) - s(n - delay)|^2``
    over the second half of the run. Ties go to the smaller delay, then to
    the earlier rotation. The returned squared error covers the whole run.
    """
    y = np.asarray(equalized, dtype=np.complex128)
    s = np.asarray(transmitted, dtype=np.complex128)
    if y.shape != s.shape:
        raise InvalidInputError("equalized and transmitted lengths differ")
    if max_delay < 0:
        raise InvalidInputError("max_delay must be >= 0")
    half = y.size // 2
    best = None
    for d in range(max_delay + 1):
        ref = _delayed(s, d)
        for c in ROTATIONS:
            diff = c * y - ref
            err = diff.real ** 2 + diff.imag ** 2
            score = float(np.mean(err[half:])) if y.size else 0.0
            if best is None or score < best[0]:
                best = (score, d, c, err)
    _, d, c, err = best
    return Alignment(d, c, err)


def run_experiment(cfg: ExperimentConfig, *, strict: bool = True) -> RunRecord:
    """Run one experiment.

    With ``strict`` a divergence raises :class:`DivergenceError`; otherwise
    the record is returned with ``diverged`` set and NaN after the failure.
    """
    n = cfg.n_symbols
    s = transmitted_symbols(n, cfg.seed)
    chan = _CHANNELS[cfg.channel]()
    x = add_awgn(channel_filter(chan, s), cfg.noise_variance, NoiseSource(cfg.seed, NOISE_STREAM))

    state = EqualizerState.fresh(
        cfg.eq_length, cfg.step, cfg.algorithm, modulus=cfg.modulus, init=cfg.init
    )
    y = np.full(n, np.nan + 0j)
    err_sq = np.full(n, np.nan)
    kid = cfg.algorithm.kernel
    desired = _delayed(s, cfg.train_delay)
    diverged_at = None
    xs = x.tolist()
    try:
        if kid is None:
            for i in range(n):
                state = push_sample(state, xs[i])
                state, yi, e = lms_update(state, desired[i])
                y[i] = yi
                err_sq[i] = e.real * e.real + e.imag * e.imag
        else:
            A = cfg.modulus
            for i in range(n):
                state = push_sample(state, xs[i])
                state, yi = cma_update(state, kid)
                y[i] = yi
                err_sq[i] = dispersion_error_sq(kid, yi, A)
    except DivergenceError as exc:
        if strict:
            raise
        diverged_at = exc.iteration
        log.warning("%s on %s diverged at iteration %d", cfg.algorithm.label, cfg.channel, exc.iteration)

    rec = RunRecord(
        config=cfg,
        transmitted=s,
        received=x,
        equalized=y,
        err_sq=err_sq,
        err_db_smoothed=smooth_db(err_sq, cfg.smoothing_window),
        final_weights=state.weights.copy(),
        diverged=diverged_at is not None,
        diverged_at=diverged_at,
    )
    if kid is not None and not rec.diverged:
        al = align_phase_delay(y, s, cfg.max_delay)
        rec.alignment = al
        rec.aligned_err_sq = al.aligned_err_sq
        rec.aligned_db_smoothed = smooth_db(al.aligned_err_sq, cfg.smoothing_window)
    return rec


def convergence_metrics(rec: RunRecord) -> Metrics:
    """Steady-state level and convergence time of a completed run.

    The steady state is the mean smoothed dB over the final 10% of
    iterations. Convergence is the first iteration from which the smoothed
    curve stays within 3 dB above that level.
    """
    if rec.diverged:
        raise MetricError(f"run diverged at iteration {rec.diverged_at}")
    db = rec.metric_db_smoothed
    n = db.size
    start = rec.config.smoothing_window - 1
    if start >= n:
        raise MetricError("run shorter than the smoothing window")
    tail = max(start, n - max(1, int(round(STEADY_FRACTION * n))))
    steady = float(np.mean(db[tail:]))
    above = np.nonzero(db[start:] > steady + CONVERGENCE_MARGIN_DB)[0]
    conv = start if above.size == 0 else start + int(above[-1]) + 1
    return Metrics(steady, conv)


def compare_algorithms(base: ExperimentConfig) -> ComparisonTable:
    """Run all five algorithms on one channel and seed.

    Each algorithm uses its own default length and step; ``base``'s
    ``eq_length``/``step`` are ignored. Divergence is recorded, not raised.
    """
    rows = []
    for alg in ALGORITHMS:
        rec = run_experiment(base.with_algorithm(alg), strict=False)
        if rec.diverged:
            rows.append(TableRow(alg, math.nan, -1, True))
            continue
        m = convergence_metrics(rec)
        rows.append(TableRow(alg, m.steady_state_db, m.conv_iteration, False))
    return ComparisonTable(base.channel, base.seed, rows)
