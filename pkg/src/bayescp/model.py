"""Variational Bayesian CP factorization with automatic rank determination.

The generative model behind the updates: an order-N tensor with entries
``y = <a^(1)_{i_1}, ..., a^(N)_{i_N}> + noise`` observed on a mask, Gaussian
factor rows with a shared per-component precision vector ``lambda`` (ARD
prior, Gamma hyperprior) and Gamma-distributed noise precision ``tau``.
All posteriors are updated in closed form by coordinate ascent on the
evidence lower bound:

* factor rows:   ``V = (E[tau] * G + diag(E[lambda]))^-1`` and
  ``m = E[tau] * V @ t`` where ``G`` sums Hadamard products of the other
  modes' second-moment matrices over the observed entries of the row's
  slice, and ``t`` sums observed values times Hadamard products of the
  other modes' mean rows;
* lambda:        ``c = c0 + sum_n I_n / 2``,
  ``d = d0 + sum_n E[||column_r||^2] / 2``;
* tau:           ``a = a0 + M / 2``, ``b = b0 + E[residual^2] / 2``.

Components whose posterior power collapses are pruned, which reads off the
tensor rank.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln

from .errors import NumericalError, ShapeMismatchError
from .tensors import ObservationMask, kruskal

_LOG2PI = math.log(2.0 * math.pi)

INIT_SVD = "svd"
INIT_RANDOM = "random"

# Bound on float64 scratch blocks when streaming over observed entries.
_BLOCK_BYTES = 1 << 24

# Mean-refinement sweeps run before the variational loop (hyperparameters
# fixed at their init values, Gram matrices built from means only).  They
# stop weak-but-real components from being shrunk away while the noise
# precision is still far below its converged value.
_WARM_SWEEPS = 5

# Observed-entry RMS the data is standardized to inside a fit.  The init
# values E[tau] = E[lambda] = 1 regularize the first iteration relative to
# this scale: much smaller working scales over-shrink weak components early,
# much larger ones let spurious components entrench.
_WORK_RMS = 2.5

# Terminal model comparison: how many variational iterations a candidate
# with one component removed gets before its bound is compared, and how
# many of the weakest components are tried before giving up.
_DISSOLVE_POLISH = 15
_DISSOLVE_PATIENCE = 2


@dataclass
class PriorConfig:
    """Hyperparameters and run controls for a fit.

    ``a0/b0`` are the Gamma prior on the noise precision, ``c0/d0`` the
    (broadcast) Gamma prior on each component precision.  The defaults of
    1e-6 give a noninformative prior with E[tau] = E[lambda_r] = 1.
    """

    init_rank: int
    a0: float = 1e-6
    b0: float = 1e-6
    c0: float = 1e-6
    d0: float = 1e-6
    init_strategy: str = INIT_SVD
    max_iters: int = 100
    tol: float = 1e-6
    prune_enabled: bool = True
    prune_tol: float = 5e-2
    seed: int = 0

    def validate(self) -> None:
        if min(self.a0, self.b0, self.c0, self.d0) <= 0:
            raise ValueError("Gamma hyperparameters must be positive")
        if self.init_rank < 1:
            raise ValueError("init_rank must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.prune_tol <= 0:
            raise ValueError("prune_tol must be positive")
        if self.init_strategy not in (INIT_SVD, INIT_RANDOM):
            raise ValueError(f"unknown init strategy {self.init_strategy!r}")


class FactorPosterior:
    """Row-factorized Gaussian posterior over one factor matrix.

    ``mean`` is (I, R); ``cov`` stacks the per-row covariances as (I, R, R);
    ``quad`` caches the per-row second moments ``m m^T + V`` as (I, R, R).
    """

    def __init__(self, mean: np.ndarray, cov: np.ndarray):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.cov = np.asarray(cov, dtype=np.float64)
        self.quad = None
        self.refresh_quad()

    def refresh_quad(self) -> None:
        self.quad = np.einsum("ir,is->irs", self.mean, self.mean) + self.cov

    @property
    def rows(self) -> int:
        return self.mean.shape[0]

    @property
    def rank(self) -> int:
        return self.mean.shape[1]

    def quad_rows(self) -> np.ndarray:
        """Second moments flattened one row per slice, (I, R*R)."""
        return self.quad.reshape(self.rows, -1)


class LambdaPosterior:
    """Gamma posterior per component precision: shape ``c``, rate ``d``."""

    def __init__(self, c: np.ndarray, d: np.ndarray):
        self.c = np.asarray(c, dtype=np.float64)
        self.d = np.asarray(d, dtype=np.float64)

    @property
    def mean(self) -> np.ndarray:
        return self.c / self.d


class TauPosterior:
    """Gamma posterior over the noise precision: shape ``a``, rate ``b``."""

    def __init__(self, a: float, b: float):
        self.a = float(a)
        self.b = float(b)

    @property
    def mean(self) -> float:
        return self.a / self.b


class ModelState:
    """All posteriors plus data handles; owned by a single fit at a time."""

    def __init__(self, factors, lam, tau, config, mask, y_obs):
        self.factors: list[FactorPosterior] = factors
        self.lam: LambdaPosterior = lam
        self.tau: TauPosterior = tau
        self.config: PriorConfig = config
        self.mask: ObservationMask = mask
        self.y_obs: np.ndarray = y_obs
        self.ysq: float = float(y_obs @ y_obs)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mask.shape

    @property
    def ndim(self) -> int:
        return self.mask.ndim

    @property
    def rank(self) -> int:
        return self.factors[0].rank


@dataclass
class FitReport:
    """Run summary; the elbo trace is one value per completed iteration."""

    elbo_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    inferred_rank: int = 0
    e_tau: float = 0.0
    wall_ms: float = 0.0
    converged: bool = False

    def to_json_dict(self) -> dict:
        return {
            "inferred_rank": int(self.inferred_rank),
            "iterations": int(self.iterations),
            "elbo_trace": [float(v) for v in self.elbo_trace],
            "e_tau": float(self.e_tau),
            "converged": bool(self.converged),
            "wall_ms": float(self.wall_ms),
        }


def max_init_rank(shape) -> int:
    """Weak upper bound on the rank: min over modes of the co-dimension."""
    total = int(np.prod(shape, dtype=np.int64))
    return min(total // int(s) for s in shape)


def _scale_match_means(means: list[np.ndarray], y_obs: np.ndarray,
                       indices: np.ndarray) -> list[np.ndarray]:
    """Rescale init means by one global factor so the initial reconstruction
    least-squares matches the observed entries.  Per-mode SVD scales multiply
    up across modes, so the raw Kruskal product of the init factors can be
    off by orders of magnitude; that mismatch poisons the first noise
    precision updates."""
    prod = None
    for n, mean in enumerate(means):
        take = mean[indices[:, n]]
        prod = take.copy() if prod is None else prod * take
    recon = prod.sum(axis=1)
    denom = float(recon @ recon)
    if denom == 0.0:
        return means
    gamma = float(y_obs @ recon) / denom
    g = math.copysign(abs(gamma) ** (1.0 / len(means)), gamma)
    return [mean * g for mean in means]


def init_model(y: np.ndarray, mask: ObservationMask, cfg: PriorConfig) -> ModelState:
    """Build the starting state: factor means by SVD of the zero-filled
    unfoldings (or standard-normal rows) rescaled to least-squares match the
    observed entries, identity row covariances, and hyperparameter
    posteriors equal to their priors."""
    cfg.validate()
    y = np.asarray(y, dtype=np.float64)
    if y.shape != mask.shape:
        raise ShapeMismatchError(f"tensor {y.shape} != mask {mask.shape}")
    if mask.ndim < 2:
        raise ValueError("fitting needs an order >= 2 tensor")
    if mask.count < 1:
        raise ValueError("mask has no observed entries")
    rank = cfg.init_rank
    cap = max_init_rank(mask.shape)
    if rank > cap:
        raise ValueError(
            f"init_rank {rank} exceeds the weak maximum-rank bound {cap} "
            f"for shape {mask.shape}"
        )

    rng = np.random.default_rng(cfg.seed)
    means = []
    for n, extent in enumerate(mask.shape):
        if cfg.init_strategy == INIT_RANDOM:
            mean = rng.standard_normal((extent, rank))
        else:
            filled = np.where(mask.flags, y, 0.0)
            unfolded = np.moveaxis(filled, n, 0).reshape((extent, -1), order="F")
            u, s, _ = np.linalg.svd(unfolded, full_matrices=False)
            k = min(rank, s.size)
            mean = np.empty((extent, rank))
            mean[:, :k] = u[:, :k] * np.sqrt(s[:k])
            if k < rank:
                mean[:, k:] = rng.normal(0.0, 0.1, size=(extent, rank - k))
        means.append(mean)
    y_obs = mask.gather(y)
    means = _scale_match_means(means, y_obs, mask.indices)

    factors = []
    for mean in means:
        cov = np.broadcast_to(np.eye(rank), (mean.shape[0], rank, rank)).copy()
        factors.append(FactorPosterior(mean, cov))
    lam = LambdaPosterior(np.full(rank, cfg.c0), np.full(rank, cfg.d0))
    tau = TauPosterior(cfg.a0, cfg.b0)
    return ModelState(factors, lam, tau, cfg, mask, y_obs)


def _block_size(rank: int) -> int:
    return max(256, _BLOCK_BYTES // max(8 * rank * rank, 8))


def _gathered_product(state: ModelState, entries: np.ndarray, skip: int | None,
                      use_quad: bool) -> np.ndarray:
    """Hadamard product over modes (except ``skip``) of per-entry factor rows.

    Returns (B, R) of mean products or (B, R, R) of second-moment products
    for the given entry positions.
    """
    idx = state.mask.indices
    out = None
    for k in range(state.ndim):
        if k == skip:
            continue
        f = state.factors[k]
        take = (f.quad if use_quad else f.mean)[idx[entries, k]]
        if out is None:
            out = take.copy()
        else:
            out *= take
    return out


def expected_kr_gram(state: ModelState, mode: int, row: int) -> np.ndarray:
    """Posterior expectation of the masked Khatri-Rao Gram matrix for one row:
    the sum, over observed entries of the row's slice, of the Hadamard
    product of the other modes' second-moment matrices."""
    rank = state.rank
    sel = state.mask.slice_entries(mode, row)
    out = np.zeros((rank, rank))
    block = _block_size(rank)
    for start in range(0, sel.size, block):
        out += _gathered_product(
            state, sel[start : start + block], mode, use_quad=True
        ).sum(axis=0)
    return out


def _slice_stats(state: ModelState, mode: int,
                 mean_gram: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Per-row Gram matrices (I, R, R) and linear terms (I, R) for one mode.

    With ``mean_gram`` the Gram uses products of mean rows only (the
    normal-equation form used by the warm-up sweeps) instead of the posterior
    second moments.
    """
    rank = state.rank
    extent = state.shape[mode]
    gram = np.zeros((extent, rank, rank))
    lin = np.zeros((extent, rank))
    y = state.y_obs
    block = _block_size(rank)
    for i in range(extent):
        sel = state.mask.slice_entries(mode, i)
        for start in range(0, sel.size, block):
            blk = sel[start : start + block]
            means = _gathered_product(state, blk, mode, use_quad=False)
            lin[i] += y[blk] @ means
            if mean_gram:
                gram[i] += np.einsum("br,bs->rs", means, means)
            else:
                gram[i] += _gathered_product(state, blk, mode, use_quad=True).sum(axis=0)
    return gram, lin


def _cholesky_rows(prec: np.ndarray) -> np.ndarray:
    """Batched Cholesky with per-row jitter escalation on failure."""
    try:
        return np.linalg.cholesky(prec)
    except np.linalg.LinAlgError:
        pass
    rank = prec.shape[-1]
    eye = np.eye(rank)
    out = np.empty_like(prec)
    for i, p in enumerate(prec):
        jitter = 1e-10 * np.trace(p) / rank
        for attempt in range(4):
            shift = 0.0 if attempt == 0 else jitter * 10.0 ** (attempt - 1)
            try:
                out[i] = np.linalg.cholesky(p + shift * eye)
                break
            except np.linalg.LinAlgError:
                continue
        else:
            raise NumericalError(
                f"row covariance stayed non-PD after jitter escalation (row {i})"
            )
    return out


def update_factor(state: ModelState, mode: int,
                  mean_gram: bool = False) -> ModelState:
    """Closed-form refresh of one mode's row posteriors (mean, covariance,
    second-moment cache).  Rows whose slice has no observations fall back to
    the prior: zero mean, covariance diag(E[lambda])^-1."""
    rank = state.rank
    gram, lin = _slice_stats(state, mode, mean_gram=mean_gram)
    e_tau = state.tau.mean
    prec = e_tau * gram
    diag = np.arange(rank)
    prec[:, diag, diag] += state.lam.mean
    chol = _cholesky_rows(prec)
    eye = np.broadcast_to(np.eye(rank), prec.shape)
    linv = np.linalg.solve(chol, eye.copy())
    cov = np.einsum("ikr,iks->irs", linv, linv)
    f = state.factors[mode]
    f.mean = e_tau * np.einsum("irs,is->ir", cov, lin)
    f.cov = cov
    f.refresh_quad()
    return state


def update_lambda(state: ModelState) -> ModelState:
    """Gamma posterior refresh for the component precisions."""
    cfg = state.config
    rank = state.rank
    sq = np.zeros(rank)
    for f in state.factors:
        sq += (f.mean ** 2).sum(axis=0) + np.einsum("irr->r", f.cov)
    state.lam.c = np.full(rank, cfg.c0 + 0.5 * sum(state.shape))
    state.lam.d = cfg.d0 + 0.5 * sq
    return state


def expected_model_error(state: ModelState) -> float:
    """Posterior expectation of the squared residual norm on observed entries.

    Evaluated as ``||y||^2 - 2 y . reconstruction + sum_entries
    <second moments>`` streaming over observed entries only; the last term is
    the generalized inner product of the per-mode R x R second-moment
    matrices, never materializing the full Khatri-Rao product.
    """
    y = state.y_obs
    count = y.size
    block = _block_size(state.rank)
    cross = 0.0
    quad = 0.0
    for start in range(0, count, block):
        blk = np.arange(start, min(start + block, count))
        means = _gathered_product(state, blk, None, use_quad=False)
        cross += y[blk] @ means.sum(axis=1)
        quad += _gathered_product(state, blk, None, use_quad=True).sum()
    err = state.ysq - 2.0 * cross + quad
    if err < -1e-9 * max(1.0, state.ysq):
        raise NumericalError(f"negative expected model error {err}")
    return max(err, 0.0)


def update_tau(state: ModelState, model_error: float | None = None) -> ModelState:
    """Gamma posterior refresh for the noise precision."""
    cfg = state.config
    if model_error is None:
        model_error = expected_model_error(state)
    state.tau = TauPosterior(cfg.a0 + 0.5 * state.mask.count,
                             cfg.b0 + 0.5 * model_error)
    return state


def lower_bound(state: ModelState, model_error: float | None = None) -> float:
    """Evidence lower bound of the current state, complete closed form.

    All additive constants (2*pi factors, prior normalizers) are kept so
    values from different runs are comparable; under the exact coordinate
    updates the sequence of values is non-decreasing.  Returns NaN if any
    row covariance has lost positive definiteness.
    """
    if model_error is None:
        model_error = expected_model_error(state)
    cfg = state.config
    a, b = state.tau.a, state.tau.b
    c, d = state.lam.c, state.lam.d
    e_tau = a / b
    e_lam = c / d
    eln_tau = digamma(a) - math.log(b)
    eln_lam = digamma(c) - np.log(d)
    m_count = state.mask.count
    sum_i = sum(state.shape)
    rank = state.rank

    sq = np.zeros(rank)
    logdet = 0.0
    for f in state.factors:
        sq += (f.mean ** 2).sum(axis=0) + np.einsum("irr->r", f.cov)
        sign, val = np.linalg.slogdet(f.cov)
        if np.any(sign <= 0):
            return float("nan")
        logdet += float(val.sum())

    value = 0.5 * m_count * (eln_tau - _LOG2PI) - 0.5 * e_tau * model_error
    value += 0.5 * sum_i * float(eln_lam.sum()) - 0.5 * float(e_lam @ sq)
    value += 0.5 * logdet + 0.5 * rank * sum_i
    value += float(
        np.sum(
            cfg.c0 * math.log(cfg.d0)
            - gammaln(cfg.c0)
            + (cfg.c0 - 1.0) * eln_lam
            - cfg.d0 * e_lam
        )
    )
    value += float(
        np.sum(c - np.log(d) + gammaln(c) + (1.0 - c) * digamma(c))
    )
    value += cfg.a0 * math.log(cfg.b0) - gammaln(cfg.a0)
    value += (cfg.a0 - 1.0) * eln_tau - cfg.b0 * e_tau
    value += a - math.log(b) + gammaln(a) + (1.0 - a) * digamma(a)
    return float(value)


def component_powers(state: ModelState) -> np.ndarray:
    """Average posterior power of each component: lambda rate / sum of extents."""
    return state.lam.d / sum(state.shape)


def effective_rank(state: ModelState) -> int:
    """Number of components whose power clears the pruning threshold."""
    powers = component_powers(state)
    return int(np.sum(powers >= state.config.prune_tol * powers.max()))


def _subset_norm_sq(factors: list[FactorPosterior], cols: np.ndarray) -> float:
    """Squared Frobenius norm of the mean reconstruction restricted to a
    component subset, via the Hadamard-of-Grams identity."""
    if cols.size == 0:
        return 0.0
    g = np.ones((cols.size, cols.size))
    for f in factors:
        sub = f.mean[:, cols]
        g *= sub.T @ sub
    return float(g.sum())


def _drop_components(state: ModelState, drop: np.ndarray) -> None:
    """Delete components from every posterior; caches stay consistent
    because submatrices of ``m m^T + V`` are exactly the dropped-model ones."""
    keep = np.setdiff1d(np.arange(state.rank), drop)
    for f in state.factors:
        f.mean = f.mean[:, keep]
        f.cov = f.cov[:, keep[:, None], keep[None, :]]
        f.quad = f.quad[:, keep[:, None], keep[None, :]]
    state.lam = LambdaPosterior(state.lam.c[keep], state.lam.d[keep])


def _clone_state(state: ModelState) -> ModelState:
    return ModelState(
        [FactorPosterior(f.mean.copy(), f.cov.copy()) for f in state.factors],
        LambdaPosterior(state.lam.c.copy(), state.lam.d.copy()),
        TauPosterior(state.tau.a, state.tau.b),
        state.config,
        state.mask,
        state.y_obs,
    )


def prune(state: ModelState) -> np.ndarray:
    """Drop components whose power falls below ``prune_tol`` times the
    largest, provided their removal changes the mean reconstruction by at
    most 1e-6 relative Frobenius.  Never prunes the last component.
    Returns the removed component indices."""
    rank = state.rank
    powers = component_powers(state)
    weak = powers < state.config.prune_tol * powers.max()
    if weak.sum() == rank:
        weak[int(np.argmax(powers))] = False
    if not weak.any():
        return np.empty(0, dtype=np.int64)

    base = _subset_norm_sq(state.factors, np.arange(rank))
    budget = 1e-12 * base
    candidates = np.flatnonzero(weak)
    candidates = candidates[np.argsort(powers[candidates], kind="stable")]
    victims: list[int] = []
    for r in candidates:
        trial = np.array(victims + [int(r)], dtype=np.int64)
        if base == 0.0 or _subset_norm_sq(state.factors, trial) <= budget:
            victims.append(int(r))
    if not victims:
        return np.empty(0, dtype=np.int64)

    drop = np.array(sorted(victims), dtype=np.int64)
    _drop_components(state, drop)
    return drop


def reconstruct(state: ModelState) -> np.ndarray:
    """Posterior-mean reconstruction: the Kruskal tensor of the factor means."""
    return kruskal([f.mean for f in state.factors])


def _vb_iteration(state: ModelState, post_factor_update=None) -> float:
    """One full coordinate-ascent pass; returns the lower bound."""
    for n in range(state.ndim):
        update_factor(state, n)
        if post_factor_update is not None:
            post_factor_update(state, n)
    update_lambda(state)
    err = expected_model_error(state)
    update_tau(state, model_error=err)
    return lower_bound(state, model_error=err)


def _dissolve_spurious(state: ModelState, bound: float,
                       post_factor_update=None) -> tuple[ModelState, list[float]]:
    """Terminal model comparison between local optima of the same bound.

    Redundant components (e.g. one true component split across two model
    components) carry enough mass that the in-loop pruning guard rightly
    refuses to touch them, and plain coordinate ascent dissolves them only
    over thousands of iterations.  Removing such a component and re-polishing
    reaches a simpler solution with an equal-or-higher bound, so: try the
    weakest components one at a time and keep any removal whose polished
    bound does not decrease.  Appended bound values therefore preserve the
    monotone trace.
    """
    accepted: list[float] = []
    while state.rank > 1:
        order = np.argsort(component_powers(state), kind="stable")
        found = False
        for r in order[:_DISSOLVE_PATIENCE]:
            trial = _clone_state(state)
            _drop_components(trial, np.array([int(r)], dtype=np.int64))
            value = bound
            for _ in range(_DISSOLVE_POLISH):
                value = _vb_iteration(trial, post_factor_update)
            if not math.isnan(value) and value >= bound:
                state, bound, found = trial, value, True
                accepted.append(value)
                break
        if not found:
            break
    return state, accepted


def _unscale_state(state: ModelState, scale: float, y_obs: np.ndarray) -> None:
    """Map a posterior fitted on ``y / scale`` back to original units.

    Factor means scale by ``scale**(1/N)`` (their product by ``scale``), row
    covariances and the lambda rates by the square of that, and the noise
    rate by ``scale**2``; shapes are scale-invariant.
    """
    n = state.ndim
    g = scale ** (1.0 / n)
    for f in state.factors:
        f.mean = f.mean * g
        f.cov = f.cov * (g * g)
        f.refresh_quad()
    state.lam = LambdaPosterior(state.lam.c, state.lam.d * (g * g))
    state.tau = TauPosterior(state.tau.a, state.tau.b * (scale * scale))
    state.y_obs = y_obs
    state.ysq = float(y_obs @ y_obs)


def _run_loop(y, mask, cfg, post_factor_update=None) -> tuple[ModelState, FitReport]:
    t0 = time.perf_counter()
    # Fit at the fixed working RMS: the init values E[tau] = E[lambda] = 1
    # carry an implicit scale assumption, so standardizing the data makes
    # the trajectory independent of input units.  The returned state is
    # mapped back to original units.
    y = np.asarray(y, dtype=np.float64)
    y_obs_orig = mask.gather(y)
    scale = float(np.sqrt(np.mean(y_obs_orig ** 2))) if y_obs_orig.size else 0.0
    if not np.isfinite(scale) or scale <= 0.0:
        scale = 1.0
    else:
        scale /= _WORK_RMS
    state = init_model(y / scale, mask, cfg)
    # Warm-up: refine the init means with hyperparameters held at their
    # init values and normal-equation Grams, so weak-but-real components
    # are not shrunk away while E[tau] is still far too small.
    for _ in range(_WARM_SWEEPS):
        for n in range(state.ndim):
            update_factor(state, n, mean_gram=True)
            if post_factor_update is not None:
                post_factor_update(state, n)
    trace: list[float] = []
    converged = False
    iterations = 0
    for it in range(1, cfg.max_iters + 1):
        iterations = it
        value = _vb_iteration(state, post_factor_update)
        if math.isnan(value):
            raise NumericalError(f"lower bound became NaN at iteration {it}")
        trace.append(value)
        converged = (
            len(trace) >= 2
            and abs(trace[-1] - trace[-2]) <= cfg.tol * abs(trace[-1])
        )
        if cfg.prune_enabled and it > 2:
            prune(state)
        if converged:
            break
    if cfg.prune_enabled and trace:
        state, accepted = _dissolve_spurious(state, trace[-1], post_factor_update)
        trace.extend(accepted)
    _unscale_state(state, scale, y_obs_orig)
    report = FitReport(
        elbo_trace=trace,
        iterations=iterations,
        inferred_rank=effective_rank(state),
        e_tau=state.tau.mean,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        converged=converged,
    )
    return state, report


def fit(y: np.ndarray, mask: ObservationMask, cfg: PriorConfig) -> tuple[ModelState, FitReport]:
    """Run the full inference loop: per-mode factor updates, lambda, tau,
    lower bound, optional pruning, until the relative lower-bound change
    drops below ``cfg.tol`` or ``cfg.max_iters`` is reached.

    The data is standardized to a fixed working scale internally and the
    returned posterior is mapped back to the input units, so results do not
    depend on the data's absolute magnitude.  ``elbo_trace`` values are
    those of the standardized model (comparable across runs on the same
    data)."""
    return _run_loop(y, mask, cfg)
