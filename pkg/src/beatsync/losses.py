"""Training-loss suite: reconstruction, kinematic and beat alignment losses.

All losses are evaluated with numpy; nothing here computes gradients.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .beat import adjacent_intervals
from .errors import ShapeMismatchError, ValidationError
from .motion import (
    FOOT_JOINTS,
    forward_difference,
    forward_kinematics,
    second_difference,
)


@dataclass(frozen=True)
class LossWeights:
    lambda_joint: float = 1.0
    lambda_vel: float = 2.5
    lambda_contact: float = 10.0
    lambda_acc: float = 0.1
    lambda_kin: float = 1.0
    lambda_beat: float = 0.5
    # shrinkage sigmoid steepness and threshold
    a: float = 10.0
    c: float = 0.2
    # floor for the relative-error denominator on beat frames
    epsilon_b: float = 1.0
    # divide the beat loss by L (the plain form is an unnormalised sum)
    normalize_beat: bool = False

    def __post_init__(self):
        for name in ("lambda_joint", "lambda_vel", "lambda_contact",
                     "lambda_acc", "lambda_kin", "lambda_beat"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")
        if not self.epsilon_b > 0:
            raise ValidationError("epsilon_b must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LossReport:
    simple: float
    joint: float
    vel: float
    contact: float
    acc: float
    kin: float
    beat: float
    total: float
    weights: LossWeights = LossWeights()

    def to_dict(self):
        d = asdict(self)
        d["weights"] = self.weights.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["weights"] = LossWeights(**d.get("weights", {}))
        return cls(**d)


def _pair(x0, x0_hat):
    if x0.frames.shape != x0_hat.frames.shape:
        raise ShapeMismatchError(
            f"sequence shapes differ: {x0.frames.shape} vs {x0_hat.frames.shape}")
    return x0.frames, x0_hat.frames


def _per_frame_sq(diff):
    # sum of squares over every non-frame axis, then mean over frames
    return float(np.mean(np.sum(diff.reshape(diff.shape[0], -1) ** 2, axis=1)))


def simple_loss(x0, x0_hat):
    a, b = _pair(x0, x0_hat)
    return float(np.mean((a - b) ** 2))


def joint_loss(x0, x0_hat, skel):
    _pair(x0, x0_hat)
    return _per_frame_sq(forward_kinematics(x0, skel) - forward_kinematics(x0_hat, skel))


def vel_loss(x0, x0_hat, skel, fps=None):
    a, b = _pair(x0, x0_hat)
    fps = x0.fps if fps is None else fps
    rep = forward_difference(a, fps) - forward_difference(b, fps)
    fk = (forward_difference(forward_kinematics(x0, skel), fps)
          - forward_difference(forward_kinematics(x0_hat, skel), fps))
    return _per_frame_sq(rep) + _per_frame_sq(fk)


def acc_loss(x0, x0_hat, skel, fps=None):
    a, b = _pair(x0, x0_hat)
    fps = x0.fps if fps is None else fps
    rep = second_difference(a, fps) - second_difference(b, fps)
    fk = (second_difference(forward_kinematics(x0, skel), fps)
          - second_difference(forward_kinematics(x0_hat, skel), fps))
    return _per_frame_sq(rep) + _per_frame_sq(fk)


def contact_loss(x0_hat, skel, fps=None):
    """Foot velocity penalised wherever the prediction claims contact.

    Contact values are used as continuous multipliers, unthresholded.
    """
    fps = x0_hat.fps if fps is None else fps
    feet = forward_kinematics(x0_hat, skel)[:, list(FOOT_JOINTS)]
    v = forward_difference(feet, fps)
    return _per_frame_sq(v * x0_hat.contacts[:, :, None])


def weighted_kin(joint, vel, contact, acc, w=LossWeights()):
    return (w.lambda_joint * joint + w.lambda_vel * vel
            + w.lambda_contact * contact + w.lambda_acc * acc)


def kin_loss(x0, x0_hat, skel, fps=None, w=LossWeights()):
    return weighted_kin(joint_loss(x0, x0_hat, skel), vel_loss(x0, x0_hat, skel, fps),
                        contact_loss(x0_hat, skel, fps), acc_loss(x0, x0_hat, skel, fps), w)


def beat_weights(b, b_hat, d, w=LossWeights()):
    """Per-frame shrinkage weight ``w_s`` and beat-proximity weight ``w_b``."""
    b = np.asarray(b, dtype=np.float64)
    b_hat = np.asarray(b_hat, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    rel = np.abs(b - b_hat) / np.maximum(b, w.epsilon_b)
    w_s = 1.0 / (1.0 + np.exp(w.a * (w.c - rel)))
    w_b = np.exp(-2.0 * b / d)
    return w_s, w_b


def beat_loss_terms(b, b_hat, d, w=LossWeights()):
    """Per-frame ``w_s * w_b * (b - b_hat)**2`` for explicit intervals ``d``."""
    b = np.asarray(b, dtype=np.float64)
    b_hat = np.asarray(b_hat, dtype=np.float64)
    if b.shape != b_hat.shape or np.shape(d) != b.shape:
        raise ShapeMismatchError("b, b_hat and d must share one shape")
    w_s, w_b = beat_weights(b, b_hat, d, w)
    return w_s * w_b * (b - b_hat) ** 2


def beat_loss(b, b_hat, grid, w=LossWeights()):
    """Beat alignment loss of predicted distances ``b_hat`` against ``b``.

    Intervals come from the designated beat ``grid``.
    """
    b = np.asarray(b)
    if b.shape != (grid.length,) or np.shape(b_hat) != (grid.length,):
        raise ShapeMismatchError(
            f"b and b_hat must both have length {grid.length}")
    terms = beat_loss_terms(b, b_hat, adjacent_intervals(grid), w)
    total = float(terms.sum())
    return total / grid.length if w.normalize_beat else total


def combine_total(simple, kin, beat, w=LossWeights()):
    return simple + w.lambda_kin * kin + w.lambda_beat * beat


def total_loss(x0, x0_hat, skel, b, b_hat, grid, w=LossWeights(), fps=None):
    """Every loss component plus the weighted total."""
    simple = simple_loss(x0, x0_hat)
    joint = joint_loss(x0, x0_hat, skel)
    vel = vel_loss(x0, x0_hat, skel, fps)
    contact = contact_loss(x0_hat, skel, fps)
    acc = acc_loss(x0, x0_hat, skel, fps)
    kin = weighted_kin(joint, vel, contact, acc, w)
    beat = beat_loss(b, b_hat, grid, w)
    return LossReport(simple, joint, vel, contact, acc, kin, beat,
                      combine_total(simple, kin, beat, w), w)
