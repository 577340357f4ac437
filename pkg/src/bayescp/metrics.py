"""Recovery metrics: relative standard error and PSNR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError


def rse(estimate: np.ndarray, truth: np.ndarray, subset: np.ndarray | None = None) -> float:
    """Relative standard error ``||estimate - truth||_F / ||truth||_F``,
    optionally restricted to the positions where ``subset`` is True (both
    numerator and denominator)."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ShapeMismatchError(f"estimate {estimate.shape} != truth {truth.shape}")
    if subset is not None:
        subset = np.asarray(subset, dtype=bool)
        if subset.shape != truth.shape:
            raise ShapeMismatchError(f"subset {subset.shape} != truth {truth.shape}")
        estimate = estimate[subset]
        truth = truth[subset]
    denom = np.linalg.norm(truth)
    if denom == 0.0:
        raise ValueError("rse undefined: reference norm is zero")
    return float(np.linalg.norm(estimate - truth) / denom)


def psnr(estimate: np.ndarray, truth: np.ndarray, peak: float) -> float:
    """Peak signal-to-noise ratio in dB over all entries; +inf on exact match."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ShapeMismatchError(f"estimate {estimate.shape} != truth {truth.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((estimate - truth) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


@dataclass
class MetricsReport:
    """Recovery summary of one completion run."""

    rse_all: float | None = None
    rse_observed: float | None = None
    rse_missing: float | None = None
    psnr: float | None = None
    inferred_rank: int | None = None
    rank_correct: bool | None = None

    def to_json_dict(self) -> dict:
        out: dict = {}
        for key in ("rse_all", "rse_observed", "rse_missing", "psnr"):
            value = getattr(self, key)
            if value is not None:
                out[key] = float(value)
        if self.inferred_rank is not None:
            out["inferred_rank"] = int(self.inferred_rank)
        if self.rank_correct is not None:
            out["rank_correct"] = bool(self.rank_correct)
        return out
