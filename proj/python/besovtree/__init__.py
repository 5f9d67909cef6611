"""MAP estimation under random tree Besov priors."""

from ._core import (
    CapacityError,
    DimensionError,
    DivergenceError,
    IoError,
    ParameterError,
    Pyramid,
    PruneResult,
    add_gaussian_noise,
    auto_prune_gaussian,
    auto_prune_laplace,
    besov_norm,
    blocks_signal,
    brute_force_map,
    convolve,
    denoise,
    forward_dwt,
    inverse_dwt,
    pnp_deconvolve,
    prune_fixed_beta,
    reduce_to_unit,
    rel_error,
    rescale_beta,
    sample_besov,
    snr_db,
    ssim,
    synthetic_image,
)

__version__ = "0.1.0"
