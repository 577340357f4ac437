"""Student-t predictive distributions over tensor entries.

Marginalizing the Gaussian row posteriors and the Gamma noise posterior
gives, per entry, a Student-t with mean equal to the generalized inner
product of the posterior mean rows, degrees of freedom ``2 a`` (the noise
shape), and a precision-like scale

``S = (b/a + sum_n h_n^T V^(n) h_n)^-1``

where ``h_n`` is the Hadamard product of the other modes' mean rows and
``V^(n)`` the row covariance.  The variance is ``dof/(dof-2) * S^-1`` when
``dof > 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError
from .model import ModelState, reconstruct
from .tensors import ObservationMask


@dataclass
class StudentTPrediction:
    """Per-entry predictive marginal: mean, precision-like scale, dof."""

    mean: float
    scale: float
    dof: float

    @property
    def variance(self) -> float:
        if self.dof <= 2:
            raise ValueError("variance undefined for dof <= 2")
        return self.dof / (self.dof - 2.0) / self.scale


def predict_entry(state: ModelState, index) -> StudentTPrediction:
    """Predictive Student-t marginal for one multi-index."""
    index = tuple(int(i) for i in index)
    if len(index) != state.ndim:
        raise IndexError(f"index {index} does not match order {state.ndim}")
    for n, i in enumerate(index):
        if not 0 <= i < state.shape[n]:
            raise IndexError(f"index {index} out of bounds for {state.shape}")
    rows = [state.factors[n].mean[i] for n, i in enumerate(index)]
    mean = float(np.prod(rows, axis=0).sum())
    s_inv = state.tau.b / state.tau.a
    for n, i in enumerate(index):
        h = np.prod([rows[k] for k in range(state.ndim) if k != n], axis=0)
        s_inv += float(h @ state.factors[n].cov[i] @ h)
    return StudentTPrediction(mean=mean, scale=1.0 / s_inv, dof=2.0 * state.tau.a)


def _scale_inverse(state: ModelState, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``S^-1 = b/a + sum_n h_n^T V h_n`` over an index batch."""
    count = indices.shape[0]
    out = np.full(count, state.tau.b / state.tau.a)
    means = [f.mean[indices[:, n]] for n, f in enumerate(state.factors)]
    for n, f in enumerate(state.factors):
        h = None
        for k in range(state.ndim):
            if k == n:
                continue
            h = means[k].copy() if h is None else h * means[k]
        cov = f.cov[indices[:, n]]
        out += np.einsum("br,brs,bs->b", h, cov, h)
    return out


def predict_missing(state: ModelState, mask: ObservationMask) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and variances for every unobserved position.

    Returns ``(mean, variance)`` tensors: the mean tensor is the posterior
    reconstruction everywhere, the variance tensor holds the Student-t
    variance at unobserved positions and 0 at observed ones.
    """
    if mask.shape != state.shape:
        raise ShapeMismatchError(f"mask {mask.shape} != state {state.shape}")
    mean = reconstruct(state)
    variance = np.zeros(state.shape)
    missing = mask.missing_indices()
    if missing.shape[0] == 0:
        return mean, variance
    dof = 2.0 * state.tau.a
    if dof <= 2.0:
        raise ValueError("variance undefined for dof <= 2 (too few observations)")
    s_inv = _scale_inverse(state, missing)
    variance[tuple(missing.T)] = dof / (dof - 2.0) * s_inv
    return mean, variance
