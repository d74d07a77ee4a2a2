"""JSON file formats for motions, skeletons, beats, masks, schedules and
reports.

Python's json module writes floats with repr precision, so every float
survives a round trip unchanged.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .beat import BeatGrid, beats_from_times
from .diffusion import NoiseSchedule, cosine_schedule
from .errors import ValidationError
from .masks import keyframe_mask
from .motion import MotionSequence, Skeleton


def read_json(path):
    with open(path) as f:
        return json.load(f)


def write_json(obj, path):
    path = Path(path)
    with open(path, "w") as f:
        json.dump(obj, f)
        f.write("\n")


def _require(d, *keys):
    missing = [k for k in keys if k not in d]
    if missing:
        raise ValidationError(f"missing field(s): {', '.join(missing)}")


# motion: {"fps": number, "frames": [[151 numbers], ...]}

def motion_to_dict(seq):
    return {"fps": seq.fps, "frames": seq.frames.tolist()}


def motion_from_dict(d):
    _require(d, "fps", "frames")
    return MotionSequence(d["fps"], d["frames"])


# skeleton: {"parents": [24 ints], "rest_offsets": [[x, y, z] x 24]}

def skeleton_to_dict(skel):
    return {"parents": list(skel.parents), "rest_offsets": skel.rest_offsets.tolist()}


def skeleton_from_dict(d):
    _require(d, "parents", "rest_offsets")
    return Skeleton(d["parents"], d["rest_offsets"])


# beats: {"fps", "length", "beat_frames"} or {"fps", "length", "beat_times_sec"}

def beats_to_dict(grid, fps):
    return {"fps": float(fps), "length": grid.length,
            "beat_frames": grid.beat_frames.tolist()}


def beats_from_dict(d):
    """Parse a beat file; returns ``(grid, fps)``."""
    _require(d, "fps", "length")
    has_frames, has_times = "beat_frames" in d, "beat_times_sec" in d
    if has_frames == has_times:
        raise ValidationError("beat file needs exactly one of beat_frames, beat_times_sec")
    fps = float(d["fps"])
    if has_frames:
        return BeatGrid(d["length"], d["beat_frames"]), fps
    return beats_from_times(d["beat_times_sec"], fps, int(d["length"])), fps


# mask: {"length": int, "keyframes": [ints]}

def mask_to_dict(mask):
    mask = np.asarray(mask)
    return {"length": int(mask.size), "keyframes": np.flatnonzero(mask).tolist()}


def mask_from_dict(d):
    _require(d, "length", "keyframes")
    return keyframe_mask(int(d["length"]), d["keyframes"])


# schedule: {"kind": str, "T": int, "offset": number|null, "betas": [numbers]}

def schedule_to_dict(sched):
    return {"kind": sched.kind, "T": sched.T, "offset": sched.offset,
            "betas": sched.betas.tolist()}


def schedule_from_dict(d):
    """Explicit betas win; otherwise a cosine schedule is built from ``T``."""
    if "betas" in d:
        sched = NoiseSchedule(d["betas"], kind=d.get("kind", "custom"), offset=d.get("offset"))
        if "T" in d and d["T"] != sched.T:
            raise ValidationError(f"T={d['T']} disagrees with {sched.T} betas")
        return sched
    _require(d, "T")
    kind = d.get("kind", "cosine")
    if kind != "cosine":
        raise ValidationError(f"unknown schedule kind {kind!r}")
    offset = d.get("offset")
    return cosine_schedule(int(d["T"]), 0.008 if offset is None else offset)


def load_motion(path):
    return motion_from_dict(read_json(path))


def save_motion(seq, path):
    write_json(motion_to_dict(seq), path)


def load_skeleton(path):
    return skeleton_from_dict(read_json(path))


def save_skeleton(skel, path):
    write_json(skeleton_to_dict(skel), path)


def load_beats(path):
    return beats_from_dict(read_json(path))


def save_beats(grid, fps, path):
    write_json(beats_to_dict(grid, fps), path)


def load_mask(path):
    return mask_from_dict(read_json(path))


def save_mask(mask, path):
    write_json(mask_to_dict(mask), path)


def load_schedule(path):
    return schedule_from_dict(read_json(path))


def save_schedule(sched, path):
    write_json(schedule_to_dict(sched), path)
