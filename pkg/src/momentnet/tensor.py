"""Dense tensor kernels shared by the MPS engine, the P-gate builders and the oracles.

Tensors are plain row-major :class:`numpy.ndarray` objects. The P-net path is
real-valued (``float64``); oracles work in ``complex128``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Raised when tensor extents are incompatible with the requested operation."""


class NumericError(ArithmeticError):
    """Raised when a numerical kernel fails or produces non-finite output."""


def _require_finite(a: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{what} produced non-finite entries")
    return a


def contract(a: np.ndarray, b: np.ndarray, axes: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired axes of two tensors.

    Args:
        a: Left tensor.
        b: Right tensor.
        axes: Pairs ``(i, j)`` meaning axis ``i`` of ``a`` is summed against axis
            ``j`` of ``b``.

    Returns:
        Tensor whose axes are the uncontracted axes of ``a`` followed by those of ``b``.

    Raises:
        DimensionError: If a paired axis is out of range or extents differ.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    left = [int(i) for i, _ in axes]
    right = [int(j) for _, j in axes]
    for i, j in zip(left, right):
        if not (-a.ndim <= i < a.ndim and -b.ndim <= j < b.ndim):
            raise DimensionError(f"axis pair ({i}, {j}) out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[i] != b.shape[j]:
            raise DimensionError(
                f"axis pair ({i}, {j}) has extents {a.shape[i]} != {b.shape[j]}"
            )
    if len(set(i % a.ndim for i in left)) != len(left) or len(set(j % b.ndim for j in right)) != len(right):
        raise DimensionError("an axis appears in more than one pair")
    return _require_finite(np.tensordot(a, b, axes=(left, right)), "contract")


def permute_reshape(a: np.ndarray, perm: Sequence[int], new_shape: Sequence[int]) -> np.ndarray:
    """Transpose axes by ``perm`` and reinterpret the row-major data with ``new_shape``.

    Raises:
        DimensionError: If ``perm`` is not a permutation of the axes or the
            element count changes.
    """
    a = np.asarray(a)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(a.ndim)):
        raise DimensionError(f"{perm} is not a permutation of {a.ndim} axes")
    new_shape = [int(s) for s in new_shape]
    if any(s < 0 for s in new_shape) or int(np.prod(new_shape, dtype=np.int64)) != a.size:
        raise DimensionError(f"cannot reshape {a.size} elements into {new_shape}")
    return np.ascontiguousarray(np.transpose(a, perm)).reshape(new_shape)


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition ``m = U @ diag(S) @ V``.

    LAPACK's divide-and-conquer driver is tried first; on failure the slower
    QR-iteration driver is used before giving up.

    Returns:
        ``(U, S, V)`` with ``S`` non-negative and descending.

    Raises:
        DimensionError: If ``m`` is not a matrix.
        NumericError: If ``m`` has non-finite entries or both drivers fail.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"svd needs a matrix, got rank {m.ndim}")
    _require_finite(m, "svd input")
    if m.size == 0:
        k = min(m.shape)
        return (np.zeros((m.shape[0], k), m.dtype), np.zeros(k), np.zeros((k, m.shape[1]), m.dtype))
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        try:
            u, s, vh = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"SVD did not converge for a {m.shape} matrix: {exc}") from exc
    return u, s, vh


def truncated_svd(
    m: np.ndarray, rel_cutoff: float = 1e-12
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD keeping singular values above ``rel_cutoff * S[0]``.

    At least one singular triple is always kept so that all-zero input yields rank 1.
    """
    u, s, vh = svd(m)
    if s.size == 0:
        raise DimensionError("cannot truncate an empty decomposition")
    keep = max(1, int(np.count_nonzero(s > rel_cutoff * s[0])))
    return u[:, :keep], s[:keep], vh[:keep]
