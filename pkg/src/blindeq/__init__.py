"""Complex-baseband simulation of trained LMS and blind CMA(p, q) equalizers."""

from .errors import (
    DegenerateSignalError,
    DivergenceError,
    InvalidInputError,
    MetricError,
)
from .signal_core import (
    QPSK_ALPHABET,
    NoiseSource,
    add_awgn,
    gaussian_pair,
    qpsk_demodulate,
    qpsk_demodulate_many,
    qpsk_modulate,
)
from .channel import (
    ChannelModel,
    EigenSpread,
    channel_filter,
    eigen_spread_2,
    make_channel,
    make_channel_h1,
    make_channel_h2,
)
from .adaptive_eq import (
    Algorithm,
    EqualizerState,
    KernelId,
    cma_kernel,
    cma_update,
    equalizer_output,
    init_weights,
    lms_update,
    push_sample,
    rule_of_thumb_step,
)
from .sim_harness import (
    Alignment,
    ComparisonTable,
    ExperimentConfig,
    Metrics,
    RunRecord,
    TableRow,
    align_phase_delay,
    compare_algorithms,
    convergence_metrics,
    run_experiment,
    smooth_db,
)

__version__ = "0.1.0"
