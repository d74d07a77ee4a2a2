"""Beat-aware keyframe mask dilation, attention masks and a masked
scaled dot-product attention kernel."""
from __future__ import annotations

import math

import numpy as np

from .beat import adjacent_intervals, nearest_beat_distance
from .errors import ShapeMismatchError, ValidationError

# base dilation step per sparse-dense fusion block
DEFAULT_DILATION_STEPS = (4, 8, 12, 16, 20, 24)


def _binary(values, name):
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ShapeMismatchError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def keyframe_mask(length, keyframes):
    """Binary mask of ``length`` with ones at ``keyframes``."""
    mask = np.zeros(length, dtype=np.int64)
    keyframes = np.asarray(keyframes, dtype=np.int64)
    if keyframes.size and (keyframes.min() < 0 or keyframes.max() >= length):
        raise ValidationError(f"keyframes must lie in [0, {length})")
    mask[keyframes] = 1
    return mask


def dilation_step(b, d, s):
    """``ceil(s * exp(-2 b / d))``, kept within ``[1, s]``."""
    if not d > 0:
        raise ValidationError(f"interval d must be positive, got {d}")
    if s < 1:
        raise ValidationError(f"base step s must be >= 1, got {s}")
    if b < 0:
        raise ValidationError(f"beat distance must be >= 0, got {b}")
    n = math.ceil(s * math.exp(-2.0 * b / d))
    return int(min(max(n, 1), s))


def dilation_steps(grid, s):
    """Dilation step for every frame under ``grid``."""
    b = nearest_beat_distance(grid)
    d = adjacent_intervals(grid)
    return np.array([dilation_step(bi, di, s) for bi, di in zip(b, d)], dtype=np.int64)


def dilate_mask(mask, grid, s):
    """Widen every keyframe into a window of beat-dependent radius.

    Keyframe ``k`` covers ``[k - n_k, k + n_k]`` clipped to the sequence, where
    ``n_k = dilation_step(b_k, d_k, s)`` is taken from the designated beat
    grid. Keyframes close to a beat get wider windows.
    """
    M = _binary(mask, "mask")
    if M.size != grid.length:
        raise ShapeMismatchError(f"mask length {M.size} != grid length {grid.length}")
    out = M.copy()
    keys = np.flatnonzero(M)
    if keys.size == 0:
        return out
    b = nearest_beat_distance(grid)
    d = adjacent_intervals(grid)
    L = M.size
    for k in keys:
        n = dilation_step(b[k], d[k], s)
        out[max(k - n, 0):min(k + n + 1, L)] = 1
    return out


def attention_mask(mask, dilated):
    """Outer product ``M M_d^T``: only keyframe rows attend."""
    M = _binary(mask, "mask")
    Md = _binary(dilated, "dilated mask")
    if M.size != Md.size:
        raise ShapeMismatchError(f"length mismatch: {M.size} vs {Md.size}")
    return np.outer(M, Md)


def masked_attention(q, k, v, mask):
    """Softmax attention restricted to positions where ``mask`` is 1.

    Rows with no allowed position return zeros.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    mask = np.asarray(mask).astype(bool)
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ShapeMismatchError("Q, K, V must be 2-D")
    if q.shape[1] != k.shape[1] or q.shape[1] < 1:
        raise ShapeMismatchError(f"Q and K feature dims differ: {q.shape} vs {k.shape}")
    if k.shape[0] != v.shape[0]:
        raise ShapeMismatchError(f"K and V lengths differ: {k.shape} vs {v.shape}")
    if mask.shape != (q.shape[0], k.shape[0]):
        raise ShapeMismatchError(f"mask shape {mask.shape} != {(q.shape[0], k.shape[0])}")

    scores = q @ k.T / np.sqrt(q.shape[1])
    scores = np.where(mask, scores, -np.inf)
    row_max = scores.max(axis=1, keepdims=True)
    empty = ~mask.any(axis=1)
    row_max[empty] = 0.0
    weights = np.where(mask, np.exp(scores - row_max), 0.0)
    denom = weights.sum(axis=1, keepdims=True)
    weights = weights / np.where(empty[:, None], 1.0, denom)
    return weights @ v
