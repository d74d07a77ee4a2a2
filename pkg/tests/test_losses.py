import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatsync.beat import BeatGrid, nearest_beat_distance
from beatsync.errors import SequenceTooShortError, ShapeMismatchError, ValidationError
from beatsync.harness import synth_motion
from beatsync.losses import (
    LossReport,
    LossWeights,
    acc_loss,
    beat_loss,
    beat_loss_terms,
    beat_weights,
    combine_total,
    contact_loss,
    joint_loss,
    kin_loss,
    simple_loss,
    total_loss,
    vel_loss,
    weighted_kin,
)
from beatsync.motion import FOOT_JOINTS, MotionSequence, forward_kinematics

from tests.helpers import pose_motion, random_motion


def shifted(seq, column, values):
    frames = np.array(seq.frames)
    frames[:, column] += values
    return MotionSequence(seq.fps, frames)


def scripted_beat_term(b, b_hat, d, a, c):
    w_b = math.exp(-2 * b / d)
    w_s = 1 / (1 + math.exp(a * (c - abs(b - b_hat) / b)))
    return w_s * w_b * (b - b_hat) ** 2


class TestSimpleAndJoint:
    def test_identical(self, rng, skel):
        x = random_motion(rng, 5)
        assert simple_loss(x, x) == 0
        assert joint_loss(x, x, skel) == 0

    def test_unit_offset(self, rng):
        x = random_motion(rng, 4)
        y = MotionSequence(x.fps, x.frames + 1.0)
        assert simple_loss(x, y) == pytest.approx(1.0, rel=1e-12)

    def test_simple_brute(self, rng):
        x, y = random_motion(rng, 3), random_motion(rng, 3)
        brute = sum((x.frames[i, j] - y.frames[i, j]) ** 2
                    for i in range(3) for j in range(151)) / (3 * 151)
        assert simple_loss(x, y) == pytest.approx(brute, rel=1e-12)

    def test_root_shift(self, rng, skel):
        x = random_motion(rng, 4)
        assert joint_loss(x, shifted(x, 4, 1.0), skel) == pytest.approx(24.0, rel=1e-12)

    def test_joint_brute(self, rng, skel):
        x, y = random_motion(rng, 3), random_motion(rng, 3)
        px, py = forward_kinematics(x, skel), forward_kinematics(y, skel)
        brute = sum(np.sum((px[i] - py[i]) ** 2) for i in range(3)) / 3
        assert joint_loss(x, y, skel) == pytest.approx(brute, rel=1e-12)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatchError):
            simple_loss(random_motion(rng, 3), random_motion(rng, 4))


class TestDerivativeLosses:
    def test_identical(self, rng, skel):
        x = random_motion(rng, 5)
        assert vel_loss(x, x, skel) == 0
        assert acc_loss(x, x, skel) == 0

    def test_constant_offset_kills_velocity(self, rng, skel):
        x = random_motion(rng, 5)
        assert vel_loss(x, shifted(x, slice(0, 7), 0.7), skel) == pytest.approx(0, abs=1e-18)

    def test_affine_offset_kills_acceleration(self, rng, skel):
        x = random_motion(rng, 6)
        ramp = (0.3 + 0.2 * np.arange(6))[:, None]
        assert acc_loss(x, shifted(x, slice(0, 7), ramp), skel) == pytest.approx(0, abs=1e-16)

    def test_vel_hand_case(self, skel):
        # root x of the prediction jumps by 1 at frame 2, fps 1:
        # representation term (0 + 1 + 1) / 3, FK term 24 joints x (0 + 1 + 1) / 3
        x = pose_motion(np.zeros((3, 3)), fps=1.0)
        y = shifted(x, 4, np.array([0.0, 0.0, 1.0]))
        assert vel_loss(x, y, skel) == pytest.approx(2 / 3 + 16, rel=1e-12)

    def test_vel_contact_channel_only(self, skel):
        x = pose_motion(np.zeros((3, 3)), fps=1.0)
        y = shifted(x, 0, np.array([0.0, 1.0, 1.0]))
        assert vel_loss(x, y, skel) == pytest.approx(1 / 3, rel=1e-12)

    def test_acc_hand_case(self, skel):
        # second differences of [0, 0, 1, 0] are 1, -2 -> padded 1, -2, -2, -2
        x = pose_motion(np.zeros((4, 3)), fps=1.0)
        y = shifted(x, 4, np.array([0.0, 0.0, 1.0, 0.0]))
        assert acc_loss(x, y, skel) == pytest.approx(13 / 4 * 25, rel=1e-12)

    def test_short(self, rng, skel):
        x = random_motion(rng, 2)
        with pytest.raises(SequenceTooShortError):
            acc_loss(x, x, skel)
        x = random_motion(rng, 1)
        with pytest.raises(SequenceTooShortError):
            vel_loss(x, x, skel)


class TestContact:
    def test_no_contact(self, rng, skel):
        x = random_motion(rng, 5)
        x = MotionSequence(x.fps, np.concatenate([np.zeros((5, 4)), x.frames[:, 4:]], axis=1))
        assert contact_loss(x, skel) == 0

    def test_static_feet(self, skel):
        x = synth_motion("static", 5)
        assert contact_loss(x, skel) == 0

    def test_unit_velocity(self, skel):
        # whole body moving at 1 m/s, contact asserted on one channel only
        x = synth_motion("linear", 6, fps=30, speed=1.0, pose_jitter=0.0)
        contacts = np.zeros((6, 4))
        contacts[:, 2] = 1.0
        y = MotionSequence(x.fps, np.concatenate([contacts, x.frames[:, 4:]], axis=1))
        assert contact_loss(y, skel) == pytest.approx(1.0, rel=1e-9)

    def test_brute(self, rng, skel):
        x = random_motion(rng, 4, fps=10)
        pos = forward_kinematics(x, skel)
        total = 0.0
        for i in range(4):
            k = min(i, 2)
            for c, j in enumerate(FOOT_JOINTS):
                v = (pos[k + 1, j] - pos[k, j]) * 10
                total += np.sum((v * x.contacts[i, c]) ** 2)
        assert contact_loss(x, skel) == pytest.approx(total / 4, rel=1e-12)


class TestKin:
    def test_weights_default(self):
        w = LossWeights()
        assert (w.lambda_joint, w.lambda_vel, w.lambda_contact, w.lambda_acc) == (1, 2.5, 10, 0.1)
        assert (w.lambda_kin, w.lambda_beat) == (1, 0.5)

    def test_unit_components(self):
        assert weighted_kin(1, 1, 1, 1) == pytest.approx(13.6, abs=1e-12)

    def test_identical(self, skel):
        x = synth_motion("static", 5)
        assert kin_loss(x, x, skel) == 0

    def test_random_recomputation(self, rng, skel):
        x, y = random_motion(rng, 5), random_motion(rng, 5)
        w = LossWeights(lambda_joint=0.3, lambda_vel=2.0, lambda_contact=0.5, lambda_acc=1.5)
        expect = (0.3 * joint_loss(x, y, skel) + 2.0 * vel_loss(x, y, skel)
                  + 0.5 * contact_loss(y, skel) + 1.5 * acc_loss(x, y, skel))
        assert kin_loss(x, y, skel, w=w) == pytest.approx(expect, rel=1e-12)

    def test_negative_weight(self):
        with pytest.raises(ValidationError):
            LossWeights(lambda_vel=-1)


class TestBeatLoss:
    def test_hand_case(self):
        w = LossWeights(a=10, c=0.2)
        got = beat_loss_terms([4.0], [6.0], [8.0], w)[0]
        assert got == pytest.approx(scripted_beat_term(4, 6, 8, 10, 0.2), abs=1e-12)
        assert got == pytest.approx(1.402, abs=1e-3)

    def test_hand_case_through_grid(self):
        grid = BeatGrid(9, [0, 8])
        b = nearest_beat_distance(grid)
        b_hat = b.astype(float)
        b_hat[4] = 6.0
        assert beat_loss(b, b_hat, grid) == pytest.approx(scripted_beat_term(4, 6, 8, 10, 0.2), abs=1e-12)

    def test_exact_prediction(self):
        grid = BeatGrid(20, [3, 9, 17])
        b = nearest_beat_distance(grid)
        assert beat_loss(b, b.astype(float), grid) == 0

    def test_on_beat_guard(self):
        w_s, w_b = beat_weights([0.0], [2.0], [8.0])
        assert w_b[0] == 1.0 and np.isfinite(w_s[0])
        assert beat_loss_terms([0.0], [2.0], [8.0])[0] == pytest.approx(
            4 / (1 + math.exp(10 * (0.2 - 2.0))), rel=1e-12)

    def test_w_b_at_half_interval(self):
        _, w_b = beat_weights([4.0], [4.0], [8.0])
        assert abs(w_b[0] - math.exp(-1)) < 1e-12

    def test_normalized(self):
        grid = BeatGrid(10, [0, 5])
        b = nearest_beat_distance(grid)
        b_hat = b + 1.5
        plain = beat_loss(b, b_hat, grid)
        assert beat_loss(b, b_hat, grid, LossWeights(normalize_beat=True)) == pytest.approx(plain / 10)

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            beat_loss(np.zeros(4), np.zeros(5), BeatGrid(4, [0]))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(0, 30), min_size=1, max_size=20),
           st.lists(st.floats(0, 40), min_size=1, max_size=20),
           st.floats(1, 60))
    def test_weight_ranges(self, b, b_hat, d):
        n = min(len(b), len(b_hat))
        b, b_hat = np.array(b[:n], float), np.array(b_hat[:n])
        w_s, w_b = beat_weights(b, b_hat, np.full(n, d))
        assert np.all((w_b > 0) & (w_b <= 1))
        assert np.all(w_b[b == 0] == 1)
        assert np.all((w_s >= 0) & (w_s <= 1))
        assert np.all(beat_loss_terms(b, b_hat, np.full(n, d)) >= 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 30), st.floats(0, 20), st.floats(0, 20), st.floats(1, 60))
    def test_monotone_in_error(self, b, e1, e2, d):
        lo, hi = sorted((e1, e2))
        t_lo = beat_loss_terms([b], [b + lo], [d])[0]
        t_hi = beat_loss_terms([b], [b + hi], [d])[0]
        assert t_lo <= t_hi * (1 + 1e-12)
        w_lo, _ = beat_weights([b], [b + lo], [d])
        w_hi, _ = beat_weights([b], [b + hi], [d])
        assert w_lo[0] <= w_hi[0]


class TestTotal:
    def test_combine_defaults(self):
        assert combine_total(2, 3, 4) == pytest.approx(7, abs=1e-12)

    def test_zero(self):
        assert combine_total(0, 0, 0) == 0

    def test_report(self, skel):
        x = synth_motion("periodic", 40, period=10, seed=2)
        y = synth_motion("periodic", 40, period=10, seed=5)
        grid = BeatGrid(40, [10, 20, 30])
        b = nearest_beat_distance(grid)
        b_hat = b + 0.5
        rep = total_loss(x, y, skel, b, b_hat, grid)
        assert rep.kin == pytest.approx(weighted_kin(rep.joint, rep.vel, rep.contact, rep.acc))
        assert rep.total == pytest.approx(rep.simple + rep.kin + 0.5 * rep.beat, abs=1e-9)
        assert rep.beat == pytest.approx(beat_loss(b, b_hat, grid))
        assert LossReport.from_dict(rep.to_dict()) == rep

    def test_zero_at_truth(self, skel):
        x = synth_motion("periodic", 40, period=10)
        grid = BeatGrid(40, [10, 20, 30])
        b = nearest_beat_distance(grid)
        rep = total_loss(x, x, skel, b, b.astype(float), grid)
        assert rep.total == 0
