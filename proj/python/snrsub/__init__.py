"""Subsampling inference for the signal-to-noise ratio of long time series."""

from ._snrsub import (
    SnrDistribution,
    SnrsubError,
    calibrate_amplitude,
    cv_objective,
    default_secondary_block,
    draw_blocks,
    empirical_quantile,
    epanechnikov,
    estimate,
    gen_design,
    gen_noise,
    priestley_chao_fit,
    read_input,
    select_bandwidth,
    select_block_size,
    snr_db,
)


def ms_to_samples(ms, fs):
    """Block length in samples for a duration in milliseconds (half up)."""
    return int(ms * fs / 1000.0 + 0.5)


__all__ = [
    "SnrDistribution",
    "SnrsubError",
    "calibrate_amplitude",
    "cv_objective",
    "default_secondary_block",
    "draw_blocks",
    "empirical_quantile",
    "epanechnikov",
    "estimate",
    "gen_design",
    "gen_noise",
    "ms_to_samples",
    "priestley_chao_fit",
    "read_input",
    "select_bandwidth",
    "select_block_size",
    "snr_db",
]
