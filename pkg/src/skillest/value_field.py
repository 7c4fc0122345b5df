"""Expected-reward fields.

The value of aiming at a target t under execution noise is the expectation
of the state's reward over the perturbed landing point. On the discretized
action grid this is the cross-correlation of the reward surface with the
discretized noise kernel; it is computed in the frequency domain with zero
padding to the full linear-convolution size (reward outside the rasterized
domain contributes zero).

Each RewardGrid caches its own padded FFT so that the transform is reused
across the many kernels evaluated per observation (one per particle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .darts import ActionGrid, RewardGrid
from .errors import MismatchedResolutionError
from .noise import ExecutionSkillParams, discretized_kernel, kernel_batch


def fft_shape(grid: ActionGrid) -> tuple[int, int]:
    """Padded transform size accommodating the largest (full-grid) kernel."""
    n = grid.n_per_side
    s = sfft.next_fast_len(2 * n - 1, real=True)
    return (s, s)


@dataclass
class ValueField:
    """Expected reward per target cell for one (state, noise) pair."""

    state_id: int | None
    params: ExecutionSkillParams | None
    grid: ActionGrid
    values: np.ndarray
    max_value: float = None
    argmax_cell: int = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.argmax_cell is None:
            # np.argmax returns the first maximum, giving lowest-index ties.
            self.argmax_cell = int(np.argmax(self.values))
        if self.max_value is None:
            self.max_value = float(self.values.flat[self.argmax_cell])


def _correlate_via_fft(
    reward: RewardGrid, kernels: np.ndarray, dtype=np.float64, workers: int = 1
) -> np.ndarray:
    """Cross-correlate the reward surface with one or more grid kernels.

    ``kernels`` has shape (..., n, n) with n odd; returns the same shape.
    """
    n = reward.grid.n_per_side
    shape = fft_shape(reward.grid)
    fr = reward.fourier(shape, dtype=dtype)
    flipped = kernels[..., ::-1, ::-1]
    fk = sfft.rfft2(flipped, s=shape, workers=workers)
    fk *= fr
    full = sfft.irfft2(fk, s=shape, workers=workers)
    lo = (n - 1) // 2
    out = full[..., lo : lo + n, lo : lo + n]
    # Zero-padded correlation with a normalized nonnegative kernel is a
    # convex combination of reward values and 0; clamp FFT roundoff to
    # those exact bounds.
    lo_b = min(0.0, float(reward.values.min()))
    hi_b = max(0.0, float(reward.values.max()))
    return np.clip(out, lo_b, hi_b)


def compute_value_field(
    reward: RewardGrid,
    params: ExecutionSkillParams,
    kernel: np.ndarray | None = None,
    fft_workers: int = 1,
) -> ValueField:
    """Expected reward for every target on the grid under the given noise.

    A precomputed kernel (on the same grid) may be supplied; otherwise the
    discretized kernel for ``params`` is built internally.
    """
    if kernel is None:
        kernel = discretized_kernel(params, reward.grid)
    kernel = np.asarray(kernel, dtype=float)
    if kernel.shape != reward.grid.shape:
        raise MismatchedResolutionError(
            f"kernel shape {kernel.shape} does not match reward grid {reward.grid.shape}"
        )
    values = _correlate_via_fft(reward, kernel, workers=fft_workers)
    return ValueField(state_id=reward.state_id, params=params, grid=reward.grid, values=values)


def optimal_action(field: ValueField) -> np.ndarray:
    """Cell center of the highest-value cell (lowest flat index on ties)."""
    return field.grid.cell_center(field.argmax_cell)


def value_fields_batch(
    reward: RewardGrid,
    sigma_x: np.ndarray,
    sigma_y: np.ndarray,
    rho: np.ndarray,
    dtype=np.float64,
    fft_workers: int = 1,
) -> np.ndarray:
    """Value surfaces for a batch of noise parameters, shape (B, n, n).

    Row i equals compute_value_field with (sigma_x[i], sigma_y[i], rho[i])
    up to dtype rounding.
    """
    kernels = kernel_batch(sigma_x, sigma_y, rho, reward.grid, dtype=dtype)
    return _correlate_via_fft(reward, kernels, dtype=dtype, workers=fft_workers)
