"""Evaluation metrics: beat alignment (BAS), physical foot contact (PFC),
key pose distance (KPD), beat assignment precision (BAP) and kinetic
diversity.

PFC scores how much root acceleration happens while both feet slide. With
the root joint standing in for the centre of mass, per frame i::

    a_i = root acceleration, vertical component clamped to max(a_y, 0)
    vL_i = min(speed of left ankle, speed of left foot)
    vR_i = min(speed of right ankle, speed of right foot)
    PFC = sum_i |a_i| * vL_i * vR_i / (L * max_i |a_i|)

and PFC = 0 when the root never accelerates. Kinetic features are the 24
per-joint mean squared speeds.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .beat import extract_motion_beats
from .errors import NoBeatsError, SequenceTooShortError, ShapeMismatchError, ValidationError
from .motion import (
    LEFT_FOOT,
    RIGHT_FOOT,
    forward_kinematics,
    joint_acceleration,
    joint_velocity,
    mean_joint_speed,
)

MOTION_TO_MUSIC = "motion-to-music"
MUSIC_TO_MOTION = "music-to-motion"
UP_AXIS = 1


@dataclass(frozen=True)
class MetricConfig:
    bas_sigma: float = 3.0
    bap_tolerance: int = 3
    bas_direction: str = MOTION_TO_MUSIC
    bap_mode: str = "precision"
    # motion beat extraction applied to generated motion
    min_prominence: float = 0.0
    smooth_radius: int = 1

    def __post_init__(self):
        if not self.bas_sigma > 0:
            raise ValidationError("bas_sigma must be positive")
        if self.bap_tolerance < 0 or int(self.bap_tolerance) != self.bap_tolerance:
            raise ValidationError("bap_tolerance must be a nonnegative integer")
        if self.bas_direction not in (MOTION_TO_MUSIC, MUSIC_TO_MOTION):
            raise ValidationError(f"unknown bas_direction {self.bas_direction!r}")
        if self.bap_mode not in ("precision", "recall"):
            raise ValidationError(f"unknown bap_mode {self.bap_mode!r}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MetricReport:
    bas: float | None = None
    pfc: float | None = None
    kpd: float | None = None
    bap: float | None = None
    div_k: float | None = None
    config: MetricConfig = MetricConfig()
    flags: tuple = field(default=())

    def to_dict(self):
        d = asdict(self)
        d["config"] = self.config.to_dict()
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["config"] = MetricConfig(**d.get("config", {}))
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)


def beat_alignment_score(motion_beats, music_beats, cfg=MetricConfig()):
    """Mean Gaussian agreement of each source beat with its nearest target beat."""
    if len(motion_beats) == 0 or len(music_beats) == 0:
        raise NoBeatsError("BAS needs beats in both grids")
    if motion_beats.length != music_beats.length:
        raise ShapeMismatchError("beat grids must share a length")
    if cfg.bas_direction == MOTION_TO_MUSIC:
        src, dst = motion_beats.beat_frames, music_beats.beat_frames
    else:
        src, dst = music_beats.beat_frames, motion_beats.beat_frames
    diff = src[:, None].astype(np.float64) - dst[None, :]
    nearest = np.min(diff ** 2, axis=1)
    return float(np.mean(np.exp(-nearest / (2.0 * cfg.bas_sigma ** 2))))


def physical_foot_contact(pos, fps):
    pos = np.asarray(pos, dtype=np.float64)
    if pos.shape[0] < 3:
        raise SequenceTooShortError("PFC needs at least 3 frames")
    acc = joint_acceleration(pos[:, 0], fps)
    acc[:, UP_AXIS] = np.maximum(acc[:, UP_AXIS], 0.0)
    acc_norm = np.linalg.norm(acc, axis=-1)
    peak = acc_norm.max()
    if peak == 0:
        return 0.0
    speed = np.linalg.norm(joint_velocity(pos, fps), axis=-1)
    v_left = speed[:, list(LEFT_FOOT)].min(axis=1)
    v_right = speed[:, list(RIGHT_FOOT)].min(axis=1)
    return float(np.sum(acc_norm * v_left * v_right) / (pos.shape[0] * peak))


def keypose_distance(gen, ref, mask):
    """MSE of root-relative joint positions over keyframes."""
    gen = np.asarray(gen, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if gen.shape != ref.shape:
        raise ShapeMismatchError(f"{gen.shape} vs {ref.shape}")
    keys = np.flatnonzero(np.asarray(mask))
    if np.size(mask) != gen.shape[0]:
        raise ShapeMismatchError("mask length must equal sequence length")
    if keys.size == 0:
        raise ValidationError("KPD needs at least one keyframe")
    local_gen = gen[keys] - gen[keys, :1]
    local_ref = ref[keys] - ref[keys, :1]
    return float(np.mean((local_gen - local_ref) ** 2))


def beat_assignment_precision(gen_beats, designated, cfg=MetricConfig()):
    """Fraction of beats matched within ``bap_tolerance`` frames.

    Precision mode scores generated beats against designated ones; recall
    mode swaps the roles. An empty scored set yields 0 with a warning.
    """
    if cfg.bap_mode == "precision":
        src, dst = gen_beats.beat_frames, designated.beat_frames
    else:
        src, dst = designated.beat_frames, gen_beats.beat_frames
    if src.size == 0:
        warnings.warn("BAP: no beats to score, returning 0", RuntimeWarning, stacklevel=2)
        return 0.0
    if dst.size == 0:
        return 0.0
    dist = np.abs(src[:, None] - dst[None, :]).min(axis=1)
    return float(np.mean(dist <= cfg.bap_tolerance))


def kinetic_features(pos, fps):
    v = joint_velocity(pos, fps)
    return np.mean(np.sum(v ** 2, axis=-1), axis=0)


def mean_pairwise_distance(features):
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] < 2:
        raise ValidationError("diversity needs at least 2 items")
    dists = [np.linalg.norm(features[i] - features[j])
             for i, j in itertools.combinations(range(features.shape[0]), 2)]
    return float(np.mean(dists))


def kinetic_diversity(seqs, skel, fps=None):
    seqs = list(seqs)
    if len(seqs) < 2:
        raise ValidationError("kinetic diversity needs at least 2 sequences")
    feats = [kinetic_features(forward_kinematics(s, skel), s.fps if fps is None else fps)
             for s in seqs]
    return mean_pairwise_distance(feats)


def motion_beats(pos, fps, cfg=MetricConfig()):
    speed = mean_joint_speed(pos, fps)
    return extract_motion_beats(speed, cfg.min_prominence, cfg.smooth_radius)


def evaluate(gen, skel, cfg=MetricConfig(), music_beats=None, designated=None,
             reference=None, mask=None, others=()):
    """Compute every metric the given inputs allow.

    ``gen`` is the generated motion; BAS needs ``music_beats``, BAP needs
    ``designated``, KPD needs ``reference`` and ``mask``, and kinetic diversity
    is taken over ``gen`` plus ``others``.
    """
    flags = []
    pos = forward_kinematics(gen, skel)
    gen_beats = motion_beats(pos, gen.fps, cfg)
    if len(gen_beats) == 0:
        flags.append("no-motion-beats")
    out = {"pfc": physical_foot_contact(pos, gen.fps)}
    if music_beats is not None:
        out["bas"] = beat_alignment_score(gen_beats, music_beats, cfg) if len(gen_beats) else 0.0
    if designated is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out["bap"] = beat_assignment_precision(gen_beats, designated, cfg)
    if reference is not None and mask is not None:
        out["kpd"] = keypose_distance(pos, forward_kinematics(reference, skel), mask)
    others = list(others)
    if others:
        out["div_k"] = kinetic_diversity([gen, *others], skel)
    return MetricReport(config=cfg, flags=tuple(flags), **out)
