"""Local-similarity variant: smooth factor means through a fixed
row-stochastic mixing matrix after each factor update.

Each mode that is smoothed gets a matrix ``W`` with rows
``W[i, j] = z_i * exp(-|i - j|^2)`` (``z_i`` normalizes the row to sum 1),
so a row's posterior mean is pulled towards its neighbours while the row
covariances are left untouched.  Useful when adjacent slices are highly
correlated (e.g. the spatial modes of an image) and many entries are
missing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .model import FitReport, ModelState, PriorConfig, _run_loop
from .tensors import ObservationMask

# Beyond this extent the Gaussian profile is truncated at |i-j| > 6 before
# normalizing; the dropped weights are below exp(-36).
_TRUNCATE_EXTENT = 2048
_TRUNCATE_BAND = 6


def build_weights(extent: int) -> np.ndarray:
    """Row-stochastic Gaussian neighbourhood weights for one mode."""
    if extent < 1:
        raise ValueError("extent must be >= 1")
    offset = np.arange(extent)
    dist_sq = (offset[:, None] - offset[None, :]) ** 2
    w = np.exp(-dist_sq.astype(np.float64))
    if extent > _TRUNCATE_EXTENT:
        w[np.abs(offset[:, None] - offset[None, :]) > _TRUNCATE_BAND] = 0.0
    w /= w.sum(axis=1, keepdims=True)
    return w


@dataclass
class MixtureWeights:
    """Per-mode mixing matrices; ``mats[n]`` is None for unsmoothed modes."""

    mats: list[np.ndarray | None]
    enabled: list[bool]

    @classmethod
    def for_shape(cls, shape: tuple[int, ...], smooth_modes) -> "MixtureWeights":
        modes = set(int(m) for m in smooth_modes)
        bad = [m for m in modes if not 0 <= m < len(shape)]
        if bad:
            raise ValueError(f"smooth modes {bad} out of range for shape {shape}")
        mats = [
            build_weights(extent) if n in modes else None
            for n, extent in enumerate(shape)
        ]
        return cls(mats=mats, enabled=[n in modes for n in range(len(shape))])


def apply_mixture(state: ModelState, weights: MixtureWeights, mode: int) -> ModelState:
    """Replace one mode's posterior mean by ``W @ mean`` and rebuild its
    second-moment cache; row covariances are kept unchanged."""
    w = weights.mats[mode]
    if w is None:
        return state
    f = state.factors[mode]
    if w.shape != (f.rows, f.rows):
        raise ShapeMismatchError(
            f"weights {w.shape} do not match mode-{mode} extent {f.rows}"
        )
    f.mean = w @ f.mean
    f.refresh_quad()
    return state


def fit_mp(y: np.ndarray, mask: ObservationMask, cfg: PriorConfig,
           smooth_modes) -> tuple[ModelState, FitReport]:
    """Same loop as :func:`bayescp.model.fit` with mean smoothing applied to
    the selected modes right after each of their factor updates; every other
    update is unchanged.  An empty ``smooth_modes`` reproduces the plain fit
    trajectory exactly."""
    smooth_modes = list(smooth_modes)
    if not smooth_modes:
        return _run_loop(y, mask, cfg)
    weights = MixtureWeights.for_shape(np.asarray(y).shape, smooth_modes)

    def hook(state: ModelState, mode: int) -> None:
        if weights.enabled[mode]:
            apply_mixture(state, weights, mode)

    return _run_loop(y, mask, cfg, post_factor_update=hook)
