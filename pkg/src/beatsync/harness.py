"""Experiment utilities: keyframe sampling, synthetic motion and plot data
for mean joint speed curves."""
from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass

import numpy as np

from .beat import BeatGrid, _round_half_away, extract_motion_beats
from .diffusion import make_rng
from .errors import ValidationError
from .motion import (
    CONTACT_DIM,
    NUM_JOINTS,
    MotionSequence,
    forward_kinematics,
    identity_rot6d,
    mean_joint_speed,
)

# training draws the keyframe ratio uniformly from this range
KEYFRAME_RATIO_RANGE = (0.01, 0.30)
SYNTH_KINDS = ("static", "linear", "periodic")


def sample_keyframes(length, ratio, seed):
    """Mask with exactly ``round(ratio * length)`` distinct random keyframes."""
    if not 0 < ratio <= 1:
        raise ValidationError(f"ratio must lie in (0, 1], got {ratio}")
    if length < 1:
        raise ValidationError("length must be >= 1")
    count = int(_round_half_away(ratio * length))
    rng = make_rng(seed)
    mask = np.zeros(length, dtype=np.int64)
    mask[rng.choice(length, size=count, replace=False)] = 1
    return mask


def sample_training_keyframes(length, seed, ratio_range=KEYFRAME_RATIO_RANGE):
    """Keyframe mask with a ratio drawn uniformly from ``ratio_range``."""
    rng = make_rng(seed)
    ratio = rng.uniform(*ratio_range)
    return sample_keyframes(length, ratio, int(rng.integers(2**63 - 1)))


def periodic_beat_frames(length, period):
    """Interior speed minima of the periodic synthetic motion."""
    return np.arange(period, length - 1, period, dtype=np.int64)


def synth_motion(kind, length, fps=30.0, seed=0, speed=1.0, period=15,
                 direction=(1.0, 0.0, 0.0), pose_jitter=0.05):
    """Deterministic synthetic motion with analytically known kinematics.

    Every kind holds one rigid body pose (identity rotations plus a small
    seeded perturbation), so all joints share the root velocity:

    * ``static``: no movement, all contacts set.
    * ``linear``: root moves along ``direction`` at ``speed`` m/s.
    * ``periodic``: root speed is ``speed * sin(pi * i / period)**2`` over the
      forward difference at frame i, so speed minima sit at multiples of
      ``period``.
    """
    if kind not in SYNTH_KINDS:
        raise ValidationError(f"kind must be one of {SYNTH_KINDS}, got {kind!r}")
    if length < 1:
        raise ValidationError("length must be >= 1")
    if speed < 0 or pose_jitter < 0:
        raise ValidationError("speed and pose_jitter must be nonnegative")
    direction = np.asarray(direction, dtype=np.float64)
    norm = np.linalg.norm(direction)
    if direction.shape != (3,) or norm == 0:
        raise ValidationError("direction must be a nonzero 3-vector")
    direction = direction / norm

    rng = make_rng(seed)
    pose = identity_rot6d((NUM_JOINTS,)) + pose_jitter * rng.standard_normal((NUM_JOINTS, 6))
    rotations = np.broadcast_to(pose, (length, NUM_JOINTS, 6))

    idx = np.arange(length, dtype=np.float64)
    if kind == "static":
        travel = np.zeros(length)
    elif kind == "linear":
        travel = speed * idx / fps
    else:
        if period < 2:
            raise ValidationError("period must be >= 2 frames")
        step = speed * np.sin(np.pi * idx[:-1] / period) ** 2 / fps
        travel = np.concatenate([[0.0], np.cumsum(step)])
    translation = travel[:, None] * direction
    contacts = np.full((length, CONTACT_DIM), 1.0 if kind == "static" else 0.0)
    return MotionSequence.from_parts(fps, contacts, translation, rotations)


@dataclass(frozen=True, eq=False)
class PlotData:
    frames: np.ndarray
    mean_speed: np.ndarray
    beat_frames: np.ndarray
    motion_beat_frames: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, PlotData):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("frames", "mean_speed", "beat_frames", "motion_beat_frames"))

    def to_dict(self):
        return {"frames": self.frames.tolist(), "mean_speed": self.mean_speed.tolist(),
                "beat_frames": self.beat_frames.tolist(),
                "motion_beat_frames": self.motion_beat_frames.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["frames"], dtype=np.int64),
                   np.asarray(d["mean_speed"], dtype=np.float64),
                   np.asarray(d["beat_frames"], dtype=np.int64),
                   np.asarray(d["motion_beat_frames"], dtype=np.int64))

    def to_csv(self):
        """One row per frame: frame, mean_speed, is_beat, is_motion_beat."""
        beat = np.isin(self.frames, self.beat_frames)
        mbeat = np.isin(self.frames, self.motion_beat_frames)
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["frame", "mean_speed", "is_beat", "is_motion_beat"])
        for f, s, b, m in zip(self.frames, self.mean_speed, beat, mbeat):
            w.writerow([int(f), repr(float(s)), int(b), int(m)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(_io.StringIO(text)))
        frames = np.array([int(r["frame"]) for r in rows], dtype=np.int64)
        speed = np.array([float(r["mean_speed"]) for r in rows])
        beat = np.array([r["is_beat"] == "1" for r in rows], dtype=bool)
        mbeat = np.array([r["is_motion_beat"] == "1" for r in rows], dtype=bool)
        return cls(frames, speed, frames[beat], frames[mbeat])


def emit_plot_data(seq, skel, music_beats=None, min_prominence=0.0, smooth_radius=1):
    """Mean joint speed curve with music-beat and motion-beat markers."""
    L = len(seq)
    speed = mean_joint_speed(forward_kinematics(seq, skel), seq.fps)
    if L >= 3:
        motion = extract_motion_beats(speed, min_prominence, smooth_radius).beat_frames
    else:
        motion = np.zeros(0, dtype=np.int64)
    if music_beats is None:
        music_beats = BeatGrid(L, [])
    elif music_beats.length != L:
        raise ValidationError(f"beat grid length {music_beats.length} != motion length {L}")
    return PlotData(np.arange(L, dtype=np.int64), speed,
                    np.asarray(music_beats.beat_frames, dtype=np.int64), motion)
