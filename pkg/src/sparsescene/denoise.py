"""End-to-end patch-based denoising.

Pipeline: initialize an overcomplete DCT dictionary, code all stride-1
patches of the noisy image with error-bounded OMP, adapt the dictionary with
K-SVD sweeps, then fuse the per-patch estimates with the noisy image through
the closed-form weighted average (mu * y + sum of estimates) / (mu + cover
count). The mu -> infinity limit returns the noisy input unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dictionary import Dictionary, KsvdConfig, init_overcomplete_dct, train_ksvd
from .errors import ParameterError
from .image import aggregate_patches, as_image, extract_patch_matrix, psnr
from .omp import omp_batch, reconstruct

LAMBDA_MODES = ("constraint", "fixed-sparsity")

DEFAULT_MU_NUMERATOR = 30.0
DEFAULT_ERROR_GAIN = 1.15
DEFAULT_TRAIN_BUDGET = 60000


@dataclass(frozen=True)
class DenoiseConfig:
    """Denoising knobs; defaults follow the standard 8x8 / 256-atom /
    3-coefficient setup."""

    sigma: float
    patch_side: int = 8
    atom_count: int = 256
    max_sparsity: int = 3
    ksvd_iterations: int = 10
    mu: float | None = None
    lambda_mode: str = "constraint"
    error_gain: float = DEFAULT_ERROR_GAIN
    seed: int = 0
    train_patch_budget: int = DEFAULT_TRAIN_BUDGET

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.patch_side < 2:
            raise ParameterError(f"patch side must be >= 2, got {self.patch_side}")
        if self.ksvd_iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.ksvd_iterations}")
        if self.mu is not None and self.mu < 0:
            raise ParameterError(f"mu must be >= 0, got {self.mu}")
        if self.error_gain <= 0:
            raise ParameterError(f"error gain must be > 0, got {self.error_gain}")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ParameterError(f"lambda mode must be one of {LAMBDA_MODES}")
        if self.train_patch_budget < 1:
            raise ParameterError("train patch budget must be >= 1")

    @property
    def effective_mu(self) -> float:
        """Fidelity weight; scales inversely with the noise level."""
        return self.mu if self.mu is not None else DEFAULT_MU_NUMERATOR / self.sigma

    @property
    def error_bound(self) -> float:
        """Per-patch squared-residual coding target."""
        if self.lambda_mode == "fixed-sparsity":
            return 0.0
        p = self.patch_side * self.patch_side
        return p * self.sigma * self.sigma * self.error_gain


@dataclass
class DenoiseResult:
    denoised: np.ndarray
    dictionary: Dictionary
    psnr_noisy: float | None
    psnr_denoised: float | None
    objective_trace: list[float] = field(default_factory=list)


def denoise_image(
    noisy,
    config: DenoiseConfig,
    reference=None,
    threads: int = 1,
) -> DenoiseResult:
    """Denoise a grayscale image; deterministic for a fixed config.

    When the stride-1 patch count exceeds the training budget, a seeded
    uniform subsample trains the dictionary while all patches are still
    coded for the reconstruction.
    """
    image = as_image(noisy, "noisy")
    side = config.patch_side
    if min(image.shape) < side:
        raise ParameterError(
            f"image {image.shape} is smaller than the {side}x{side} patch size"
        )

    origins, signals = extract_patch_matrix(image, side, stride=1)
    total = signals.shape[1]
    kcfg = KsvdConfig(
        iterations=config.ksvd_iterations,
        max_sparsity=config.max_sparsity,
        error_bound=config.error_bound,
        seed=config.seed,
    )

    init = init_overcomplete_dct(side, config.atom_count)
    subsampled = total > config.train_patch_budget
    if subsampled:
        rng = np.random.Generator(np.random.PCG64(config.seed))
        train_idx = np.sort(rng.choice(total, size=config.train_patch_budget, replace=False))
        train_signals = signals[:, train_idx]
    else:
        train_signals = signals

    dictionary, codes, trace = train_ksvd(train_signals, kcfg, init, threads)
    if subsampled:
        codes = omp_batch(dictionary, signals, kcfg, threads)

    estimates = [(origins[k], reconstruct(dictionary, codes[k])) for k in range(total)]
    denoised = aggregate_patches(estimates, image, config.effective_mu)

    psnr_noisy = psnr_denoised = None
    if reference is not None:
        ref = as_image(reference, "reference")
        psnr_noisy = psnr(ref, image)
        psnr_denoised = psnr(ref, denoised)

    return DenoiseResult(
        denoised=denoised,
        dictionary=dictionary,
        psnr_noisy=psnr_noisy,
        psnr_denoised=psnr_denoised,
        objective_trace=trace,
    )
