"""Dense tensor primitives: unfolding, Khatri-Rao, Hadamard, Kruskal
reconstruction and masked norms.

Conventions
-----------
Tensors are plain ``numpy.ndarray`` objects in float64.  The linear layout
used for serialization and vectorization is column-major (first index
varies fastest), so ``vec(X) = X.ravel(order="F")``.  The mode-``n``
unfolding maps entry ``(i_0, ..., i_{N-1})`` to row ``i_n`` and column
``sum_{k != n} i_k * prod_{m < k, m != n} I_m``, i.e. lower modes vary
fastest.  ``khatri_rao`` composes columns so that the first listed factor's
index varies fastest, which makes ``vec(kruskal(mats))`` equal to
``khatri_rao(mats) @ ones(R)``.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError

MAX_ORDER = 8


def _check_shape(shape: tuple[int, ...]) -> None:
    if len(shape) < 1 or len(shape) > MAX_ORDER:
        raise ValueError(f"tensor order must be in [1, {MAX_ORDER}], got {len(shape)}")
    if any(int(s) < 1 for s in shape):
        raise ValueError(f"all extents must be >= 1, got {shape}")


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding (matricization) of a tensor.

    Returns a matrix of shape ``(I_mode, prod of remaining extents)``.
    """
    tensor = np.asarray(tensor)
    if not 0 <= mode < tensor.ndim:
        raise ValueError(f"mode {mode} out of range for order-{tensor.ndim} tensor")
    return np.moveaxis(tensor, mode, 0).reshape(
        (tensor.shape[mode], -1), order="F"
    )


def fold(matrix: np.ndarray, mode: int, shape: tuple[int, ...]) -> np.ndarray:
    """Inverse of :func:`unfold`: refold a mode-``mode`` unfolding."""
    matrix = np.asarray(matrix)
    shape = tuple(int(s) for s in shape)
    _check_shape(shape)
    if not 0 <= mode < len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    rest = tuple(s for k, s in enumerate(shape) if k != mode)
    if matrix.shape != (shape[mode], int(np.prod(rest, dtype=np.int64))):
        raise ShapeMismatchError(
            f"matrix shape {matrix.shape} does not match mode-{mode} "
            f"unfolding of {shape}"
        )
    moved = matrix.reshape((shape[mode],) + rest, order="F")
    return np.moveaxis(moved, 0, mode)


def khatri_rao(mats: list[np.ndarray], skip: int | None = None) -> np.ndarray:
    """Columnwise Kronecker product of matrices sharing a column count.

    The first listed factor's row index varies fastest in the output rows.
    ``skip`` drops one matrix from the list (the leave-one-out product used
    by the mode-``skip`` unfolding identity).
    """
    mats = list(mats)
    if skip is not None:
        mats.pop(skip)
    if not mats:
        raise ValueError("khatri_rao needs at least one matrix")
    cols = mats[0].shape[1]
    for m in mats:
        if m.ndim != 2 or m.shape[1] != cols:
            raise ShapeMismatchError(
                f"all factors must be matrices with {cols} columns"
            )
    out = mats[0]
    for m in mats[1:]:
        # new rows indexed (j, p) with p (accumulated) fastest
        out = (m[:, None, :] * out[None, :, :]).reshape(-1, cols)
    return out


def hadamard(mats: list[np.ndarray]) -> np.ndarray:
    """Entrywise product of equally shaped arrays."""
    mats = list(mats)
    if not mats:
        raise ValueError("hadamard needs at least one array")
    shape = mats[0].shape
    out = np.array(mats[0], dtype=np.float64, copy=True)
    for m in mats[1:]:
        if m.shape != shape:
            raise ShapeMismatchError(f"shape {m.shape} != {shape}")
        out *= m
    return out


def kruskal(mats: list[np.ndarray]) -> np.ndarray:
    """Reconstruct a tensor from CP factor matrices.

    ``X[i_0, ..., i_{N-1}] = sum_r prod_n mats[n][i_n, r]``.
    """
    mats = [np.asarray(m, dtype=np.float64) for m in mats]
    if not mats:
        raise ValueError("kruskal needs at least one factor matrix")
    cols = mats[0].shape[1]
    for m in mats:
        if m.ndim != 2 or m.shape[1] != cols:
            raise ShapeMismatchError(
                f"all factors must be matrices with {cols} columns"
            )
    n = len(mats)
    if n > MAX_ORDER:
        raise ValueError(f"tensor order must be <= {MAX_ORDER}")
    letters = "abcdefgh"[:n]
    spec = ",".join(f"{c}r" for c in letters) + "->" + letters
    return np.einsum(spec, *mats)


def generalized_inner_product(vecs: list[np.ndarray]) -> float:
    """Sum over components of the elementwise product of equal-length vectors.

    For two vectors this is the ordinary dot product.
    """
    vecs = [np.asarray(v, dtype=np.float64) for v in vecs]
    if not vecs:
        raise ValueError("need at least one vector")
    size = vecs[0].shape
    out = np.ones(size)
    for v in vecs:
        if v.shape != size:
            raise ShapeMismatchError(f"length {v.shape} != {size}")
        out = out * v
    return float(out.sum())


def masked_sq_frobenius(tensor: np.ndarray, mask: "ObservationMask") -> float:
    """Squared Frobenius norm restricted to observed positions."""
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.shape != mask.shape:
        raise ShapeMismatchError(f"tensor {tensor.shape} != mask {mask.shape}")
    vals = tensor[mask.flags]
    return float(vals @ vals)


class ObservationMask:
    """Boolean observation pattern plus per-mode slice index caches.

    The factor updates repeatedly need, for every mode ``n`` and slice index
    ``i``, the observed entries whose mode-``n`` index equals ``i``.  The
    constructor enumerates observed entries once (in column-major linear
    order) and sorts them per mode so each such slice is a contiguous range.

    Attributes
    ----------
    flags : bool ndarray, the dense indicator (True = observed).
    count : number of observed entries M.
    indices : int64 array (M, N), multi-index of each observed entry.
    """

    def __init__(self, flags: np.ndarray):
        flags = np.ascontiguousarray(flags).astype(bool, copy=False)
        _check_shape(flags.shape)
        self.flags = flags
        self.shape = flags.shape
        self.ndim = flags.ndim
        lin = np.flatnonzero(flags.ravel(order="F"))
        self.count = int(lin.size)
        multi = np.unravel_index(lin, self.shape, order="F")
        self.indices = np.column_stack(multi).astype(np.int64)
        self._perm = []
        self._offsets = []
        for n in range(self.ndim):
            perm = np.argsort(self.indices[:, n], kind="stable")
            counts = np.bincount(
                self.indices[:, n], minlength=self.shape[n]
            )
            self._perm.append(perm)
            self._offsets.append(
                np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
            )

    def slice_entries(self, mode: int, index: int) -> np.ndarray:
        """Positions (into the M-length entry arrays) of observed entries
        whose mode-``mode`` index equals ``index``."""
        off = self._offsets[mode]
        return self._perm[mode][off[index] : off[index + 1]]

    def slice_counts(self, mode: int) -> np.ndarray:
        """Number of observed entries per slice of the given mode."""
        off = self._offsets[mode]
        return np.diff(off)

    def gather(self, tensor: np.ndarray) -> np.ndarray:
        """Observed values of ``tensor`` as an M-vector (entry order)."""
        if tensor.shape != self.shape:
            raise ShapeMismatchError(
                f"tensor {tensor.shape} != mask {self.shape}"
            )
        return np.asarray(tensor, dtype=np.float64)[tuple(self.indices.T)]

    @property
    def missing_count(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) - self.count

    def missing_indices(self) -> np.ndarray:
        """Multi-indices of the unobserved positions, column-major order."""
        lin = np.flatnonzero(~self.flags.ravel(order="F"))
        multi = np.unravel_index(lin, self.shape, order="F")
        return np.column_stack(multi).astype(np.int64)

    @classmethod
    def all_observed(cls, shape: tuple[int, ...]) -> "ObservationMask":
        return cls(np.ones(shape, dtype=bool))
