"""Beat grids, nearest-beat distances, adjacent-beat intervals and motion
beat extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import peak_prominences

from .errors import BeatRangeError, NoBeatsError, ValidationError
from .motion import forward_kinematics, mean_joint_speed


@dataclass(frozen=True, eq=False)
class BeatGrid:
    """Strictly increasing beat frame indices over ``length`` frames."""

    length: int
    beat_frames: np.ndarray

    def __post_init__(self):
        length = int(self.length)
        if length < 1:
            raise ValidationError(f"length must be >= 1, got {self.length}")
        beats = np.asarray(self.beat_frames, dtype=np.int64).reshape(-1)
        if beats.size and (beats[0] < 0 or beats[-1] >= length):
            raise BeatRangeError(f"beat frames must lie in [0, {length})")
        if np.any(np.diff(beats) <= 0):
            raise ValidationError("beat frames must be strictly increasing")
        beats = beats.copy()
        beats.setflags(write=False)
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "beat_frames", beats)

    def __len__(self):
        return self.beat_frames.size

    def __eq__(self, other):
        if not isinstance(other, BeatGrid):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.beat_frames, other.beat_frames)

    @classmethod
    def from_unsorted(cls, length, frames):
        return cls(length, np.unique(np.asarray(frames, dtype=np.int64)))

    def to_binary(self):
        mask = np.zeros(self.length, dtype=np.int64)
        mask[self.beat_frames] = 1
        return mask


def _require_beats(grid):
    if len(grid) == 0:
        raise NoBeatsError("beat grid has no beats")


def nearest_beat_distance(grid):
    """Distance in frames from every frame to its closest beat."""
    _require_beats(grid)
    beats = grid.beat_frames
    idx = np.arange(grid.length)
    right = np.searchsorted(beats, idx)
    after = beats[np.minimum(right, beats.size - 1)]
    before = beats[np.maximum(right - 1, 0)]
    return np.minimum(np.abs(after - idx), np.abs(idx - before))


def adjacent_intervals(grid):
    """Per-frame length of the beat interval enclosing each frame.

    A frame sitting on an interior beat takes the interval that starts at that
    beat; the last beat takes the interval that ends at it. Frames before the
    first or after the last beat use the nearest interior interval. With a
    single beat every frame gets ``length``.
    """
    _require_beats(grid)
    beats = grid.beat_frames
    L = grid.length
    if beats.size == 1:
        return np.full(L, L, dtype=np.int64)
    gaps = np.diff(beats)
    # index of the interval [beats[k], beats[k+1]] containing each frame
    k = np.searchsorted(beats, np.arange(L), side="right") - 1
    k = np.clip(k, 0, gaps.size - 1)
    return gaps[k]


def adjacent_interval(grid, i):
    if not 0 <= i < grid.length:
        raise BeatRangeError(f"frame {i} outside [0, {grid.length})")
    return int(adjacent_intervals(grid)[i])


def box_smooth(x, radius):
    """Moving average over ``[i - radius, i + radius]``, truncated at the ends."""
    x = np.asarray(x, dtype=np.float64)
    if radius <= 0:
        return x.copy()
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(x.size)
    lo = np.maximum(idx - radius, 0)
    hi = np.minimum(idx + radius + 1, x.size)
    return (c[hi] - c[lo]) / (hi - lo)


def extract_motion_beats(speed, min_prominence=0.0, smooth_radius=1):
    """Motion beats as strict interior local minima of a speed curve.

    The curve is box-smoothed first; minima whose prominence is below
    ``min_prominence`` are dropped. Endpoints are never beats.
    """
    speed = np.asarray(speed, dtype=np.float64)
    if speed.ndim != 1 or speed.size < 3:
        raise ValidationError("speed curve must be 1-D with at least 3 samples")
    if min_prominence < 0 or smooth_radius < 0:
        raise ValidationError("min_prominence and smooth_radius must be >= 0")
    s = box_smooth(speed, int(smooth_radius))
    inner = s[1:-1]
    minima = np.flatnonzero((inner < s[:-2]) & (inner < s[2:])) + 1
    if min_prominence > 0 and minima.size:
        prom = peak_prominences(-s, minima)[0]
        minima = minima[prom >= min_prominence]
    return BeatGrid(speed.size, minima)


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def beats_from_times(times_sec, fps, length):
    """Convert beat times in seconds to a grid of frame indices."""
    times = np.asarray(times_sec, dtype=np.float64).reshape(-1)
    if times.size == 0:
        return BeatGrid(length, [])
    if np.any(np.diff(times) < 0):
        raise ValidationError("beat times must be nondecreasing")
    if times[0] < 0 or times[-1] >= length / fps:
        raise BeatRangeError(f"beat times must lie in [0, {length / fps})")
    frames = np.clip(_round_half_away(times * fps).astype(np.int64), 0, length - 1)
    return BeatGrid(length, np.unique(frames))


def frames_to_times(grid, fps):
    return grid.beat_frames / float(fps)


@dataclass(frozen=True)
class BeatEstimate:
    distances: np.ndarray
    motion_beats: BeatGrid
    no_beats: bool


def estimate_beat_distance(seq, skel, min_prominence=0.0, smooth_radius=1):
    """Kinematic beat-distance estimate for a motion sequence.

    FK positions -> mean joint speed -> velocity-minimum motion beats ->
    nearest-beat distances. When no motion beat is found, every entry is the
    sentinel ``L`` (larger than any real distance) and ``no_beats`` is set.
    """
    L = len(seq)
    if L < 3:
        raise ValidationError("beat estimation needs at least 3 frames")
    speed = mean_joint_speed(forward_kinematics(seq, skel), seq.fps)
    grid = extract_motion_beats(speed, min_prominence, smooth_radius)
    if len(grid) == 0:
        return BeatEstimate(np.full(L, L, dtype=np.int64), grid, True)
    return BeatEstimate(nearest_beat_distance(grid), grid, False)
