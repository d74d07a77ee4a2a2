import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatsync.beat import BeatGrid
from beatsync.errors import ShapeMismatchError, ValidationError
from beatsync.masks import (
    DEFAULT_DILATION_STEPS,
    attention_mask,
    dilate_mask,
    dilation_step,
    dilation_steps,
    keyframe_mask,
    masked_attention,
)


def hp_step(b, d, s):
    with mpmath.workdps(50):
        return int(mpmath.ceil(s * mpmath.exp(-2 * mpmath.mpf(b) / mpmath.mpf(d))))


def brute_dilate(M, grid, s):
    beats = [int(x) for x in grid.beat_frames]
    out = list(M)
    for k, on in enumerate(M):
        if not on:
            continue
        b = min(abs(k - x) for x in beats)
        if len(beats) == 1:
            d = grid.length
        else:
            pairs = list(zip(beats, beats[1:]))
            if k < beats[0]:
                d = beats[1] - beats[0]
            elif k >= beats[-1]:
                d = beats[-1] - beats[-2]
            else:
                d = next(b2 - b1 for b1, b2 in pairs if b1 <= k < b2)
        n = hp_step(b, d, s)
        for j in range(len(M)):
            if abs(j - k) <= n:
                out[j] = 1
    return out


@st.composite
def mask_and_grid(draw):
    L = draw(st.integers(1, 80))
    M = draw(st.lists(st.integers(0, 1), min_size=L, max_size=L))
    beats = draw(st.sets(st.integers(0, L - 1), min_size=1))
    return np.array(M), BeatGrid(L, sorted(beats))


class TestDilationStep:
    def test_examples(self):
        assert dilation_step(0, 7, 4) == 4
        assert dilation_step(5, 5, 4) == 1
        assert dilation_step(4, 8, 8) == 3

    def test_default_table(self):
        for s in DEFAULT_DILATION_STEPS:
            for ratio in (0, 0.25, 0.5, 1):
                assert dilation_step(ratio * 8, 8, s) == hp_step(ratio * 8, 8, s)

    def test_far_from_beat_clamped_to_one(self):
        assert dilation_step(1e6, 1, 24) == 1

    @pytest.mark.parametrize("b,d,s", [(1, 0, 4), (1, -2, 4), (1, 2, 0), (-1, 2, 4)])
    def test_domain(self, b, d, s):
        with pytest.raises(ValidationError):
            dilation_step(b, d, s)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 100), st.floats(0, 100), st.floats(0.1, 100), st.integers(1, 30))
    def test_monotone_and_range(self, b1, b2, d, s):
        lo, hi = sorted((b1, b2))
        n_lo, n_hi = dilation_step(lo, d, s), dilation_step(hi, d, s)
        assert 1 <= n_hi <= n_lo <= s

    def test_steps_per_frame(self):
        grid = BeatGrid(9, [0, 8])
        steps = dilation_steps(grid, 8)
        assert steps[0] == 8 and steps[4] == math.ceil(8 * math.exp(-1))


class TestDilateMask:
    def test_window_on_beat(self):
        M = keyframe_mask(20, [10])
        Md = dilate_mask(M, BeatGrid(20, [10]), 4)
        np.testing.assert_array_equal(np.flatnonzero(Md), np.arange(6, 15))

    def test_empty_mask(self):
        np.testing.assert_array_equal(dilate_mask(np.zeros(10, int), BeatGrid(10, [3]), 8), 0)

    def test_overlap_is_union(self):
        M = keyframe_mask(30, [10, 13])
        grid = BeatGrid(30, [10, 13])
        Md = dilate_mask(M, grid, 4)
        np.testing.assert_array_equal(Md, brute_dilate(M, grid, 4))
        assert np.flatnonzero(Md).tolist() == list(range(6, 18))

    def test_truncated_at_edges(self):
        Md = dilate_mask(keyframe_mask(6, [0]), BeatGrid(6, [0]), 4)
        np.testing.assert_array_equal(Md, [1, 1, 1, 1, 1, 0])

    def test_nearer_keyframes_wider(self):
        grid = BeatGrid(60, [0, 30, 59])
        near = dilate_mask(keyframe_mask(60, [31]), grid, 12).sum()
        far = dilate_mask(keyframe_mask(60, [44]), grid, 12).sum()
        assert near > far

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dilate_mask(np.zeros(5, int), BeatGrid(6, [0]), 4)

    def test_non_binary(self):
        with pytest.raises(ValidationError):
            dilate_mask(np.array([0, 2, 0]), BeatGrid(3, [0]), 4)

    @settings(max_examples=200, deadline=None)
    @given(mask_and_grid(), st.sampled_from(DEFAULT_DILATION_STEPS))
    def test_matches_brute_and_dominates(self, mg, s):
        M, grid = mg
        Md = dilate_mask(M, grid, s)
        assert np.all(Md >= M)
        np.testing.assert_array_equal(Md, brute_dilate(M, grid, s))
        # same keyframes give the same windows
        np.testing.assert_array_equal(dilate_mask(M, grid, s), Md)


class TestAttentionMask:
    def test_one_hot_row(self):
        M = keyframe_mask(8, [3])
        Md = np.array([0, 1, 1, 1, 1, 1, 0, 0])
        A = attention_mask(M, Md)
        np.testing.assert_array_equal(A[3], Md)
        assert A.sum() == Md.sum()

    def test_all_ones(self):
        np.testing.assert_array_equal(attention_mask(np.ones(4, int), np.ones(4, int)), 1)

    def test_brute(self, rng):
        M, Md = rng.integers(0, 2, 12), rng.integers(0, 2, 12)
        A = attention_mask(M, Md)
        for i in range(12):
            for j in range(12):
                assert A[i, j] == M[i] * Md[j]
                if A[i, j]:
                    assert M[i] == 1

    def test_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            attention_mask(np.ones(3, int), np.ones(4, int))


def hand_attention(q, k, v, mask):
    out = np.zeros((q.shape[0], v.shape[1]))
    for i in range(q.shape[0]):
        allowed = [j for j in range(k.shape[0]) if mask[i][j]]
        if not allowed:
            continue
        scores = [sum(q[i, c] * k[j, c] for c in range(q.shape[1])) / math.sqrt(q.shape[1])
                  for j in allowed]
        exps = [math.exp(s) for s in scores]
        z = sum(exps)
        for w, j in zip(exps, allowed):
            out[i] += (w / z) * v[j]
    return out


class TestMaskedAttention:
    def test_singleton_rows(self, rng):
        q, k, v = rng.standard_normal((3, 5, 4))
        mask = np.zeros((5, 5), int)
        cols = [2, 0, 4, 4, 1]
        mask[np.arange(5), cols] = 1
        out = masked_attention(q, k, v, mask)
        np.testing.assert_allclose(out, v[cols], atol=1e-12)

    def test_uniform_when_q_zero(self, rng):
        k, v = rng.standard_normal((2, 6, 3))
        out = masked_attention(np.zeros((6, 3)), k, v, np.ones((6, 6)))
        np.testing.assert_allclose(out, np.broadcast_to(v.mean(0), (6, 3)), atol=1e-12)

    def test_small_hand_case(self):
        q = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        k = np.array([[1.0, 2.0], [0.5, -1.0], [2.0, 0.0]])
        v = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])
        mask = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1]])
        np.testing.assert_allclose(masked_attention(q, k, v, mask),
                                   hand_attention(q, k, v, mask), atol=1e-12)

    def test_fully_masked_row_is_zero(self, rng):
        q, k, v = rng.standard_normal((3, 4, 2))
        mask = np.ones((4, 4), int)
        mask[2] = 0
        out = masked_attention(q, k, v, mask)
        np.testing.assert_array_equal(out[2], 0)

    def test_shape_errors(self):
        with pytest.raises(ShapeMismatchError):
            masked_attention(np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 2)))
        with pytest.raises(ShapeMismatchError):
            masked_attention(np.ones((2, 3)), np.ones((2, 3)), np.ones((2, 2)), np.ones((3, 3)))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_convex_combination(self, L, d, seed):
        r = np.random.default_rng(seed)
        q, k = 3 * r.standard_normal((2, L, d))
        v = r.standard_normal((L, 3))
        mask = r.integers(0, 2, (L, L))
        out = masked_attention(q, k, v, mask)
        np.testing.assert_allclose(out, hand_attention(q, k, v, mask), atol=1e-10)
        for i in range(L):
            allowed = np.flatnonzero(mask[i])
            if allowed.size:
                assert np.all(out[i] >= v[allowed].min(0) - 1e-12)
                assert np.all(out[i] <= v[allowed].max(0) + 1e-12)
