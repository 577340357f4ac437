"""Shared builders for randomized model states used by the oracle tests."""

import numpy as np

from bayescp.model import (
    FactorPosterior,
    LambdaPosterior,
    ModelState,
    PriorConfig,
    TauPosterior,
)
from bayescp.tensors import ObservationMask


def random_mask(rng, shape, obs_ratio):
    total = int(np.prod(shape))
    n_obs = max(1, int(round(obs_ratio * total)))
    flags = np.zeros(total, dtype=bool)
    flags[rng.choice(total, size=n_obs, replace=False)] = True
    return ObservationMask(flags.reshape(shape, order="F"))


def random_spd(rng, rank, scale=0.3):
    a = rng.standard_normal((rank, rank))
    return scale * (a @ a.T / rank) + 0.05 * np.eye(rank)


def random_state(rng, shape, rank, obs_ratio=0.7):
    """A ModelState with arbitrary (valid) posteriors, not from a fit."""
    mask = random_mask(rng, shape, obs_ratio)
    y = rng.standard_normal(shape)
    factors = []
    for extent in shape:
        mean = rng.standard_normal((extent, rank))
        cov = np.stack([random_spd(rng, rank) for _ in range(extent)])
        factors.append(FactorPosterior(mean, cov))
    lam = LambdaPosterior(rng.uniform(0.5, 3.0, rank), rng.uniform(0.5, 3.0, rank))
    tau = TauPosterior(rng.uniform(1.0, 30.0), rng.uniform(0.5, 3.0))
    cfg = PriorConfig(init_rank=rank)
    return ModelState(factors, lam, tau, cfg, mask, mask.gather(y))
