"""Pose data model, 6-DOF rotation decoding, forward kinematics and
finite-difference kinematics.

A pose frame is a 151-vector laid out as 4 foot-contact labels, 3 root
translation values and 24 x 6 rotation values (joint order, 6 per joint).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    DegenerateRotationError,
    SequenceTooShortError,
    ShapeMismatchError,
    ValidationError,
)

NUM_JOINTS = 24
CONTACT_DIM = 4
TRANSLATION_DIM = 3
ROTATION_DIM = NUM_JOINTS * 6
POSE_DIM = CONTACT_DIM + TRANSLATION_DIM + ROTATION_DIM  # 151

# SMPL has no heel joint: heels are the ankles (7, 8), toes the feet (10, 11).
# Contact channel k belongs to FOOT_JOINTS[k].
FOOT_JOINTS = (7, 8, 10, 11)
LEFT_FOOT = (7, 10)
RIGHT_FOOT = (8, 11)

SMPL_PARENTS = (-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14,
                16, 17, 18, 19, 20, 21)

# second vector must keep this fraction of its norm after projection
_PARALLEL_TOL = 1e-9
_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True, eq=False)
class MotionSequence:
    """An immutable ``(L, 151)`` pose sequence sampled at ``fps``."""

    fps: float
    frames: np.ndarray

    def __post_init__(self):
        fps = float(self.fps)
        if not np.isfinite(fps) or fps <= 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != POSE_DIM:
            raise ShapeMismatchError(
                f"frames must have shape (L, {POSE_DIM}), got {frames.shape}")
        if frames.shape[0] < 1:
            raise ValidationError("a motion sequence needs at least one frame")
        if not np.all(np.isfinite(frames)):
            raise ValidationError("frames contain non-finite values")
        frames.setflags(write=False)
        object.__setattr__(self, "fps", fps)
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MotionSequence):
            return NotImplemented
        return self.fps == other.fps and np.array_equal(self.frames, other.frames)

    @property
    def contacts(self):
        return self.frames[:, :CONTACT_DIM]

    @property
    def root_translation(self):
        return self.frames[:, CONTACT_DIM:CONTACT_DIM + TRANSLATION_DIM]

    @property
    def rotations(self):
        """Per-joint 6-DOF rotations, shape ``(L, 24, 6)``."""
        return self.frames[:, CONTACT_DIM + TRANSLATION_DIM:].reshape(-1, NUM_JOINTS, 6)

    @classmethod
    def from_parts(cls, fps, contacts, root_translation, rotations):
        contacts = np.asarray(contacts, dtype=np.float64)
        root_translation = np.asarray(root_translation, dtype=np.float64)
        rotations = np.asarray(rotations, dtype=np.float64)
        L = root_translation.shape[0]
        frames = np.concatenate(
            [contacts.reshape(L, CONTACT_DIM),
             root_translation.reshape(L, TRANSLATION_DIM),
             rotations.reshape(L, ROTATION_DIM)], axis=1)
        return cls(fps, frames)


@dataclass(frozen=True, eq=False)
class Skeleton:
    """Kinematic tree: parent indices plus parent-relative rest offsets."""

    parents: tuple
    rest_offsets: np.ndarray

    def __post_init__(self):
        parents = tuple(int(p) for p in self.parents)
        offsets = np.array(self.rest_offsets, dtype=np.float64)
        if len(parents) != NUM_JOINTS:
            raise ValidationError(f"skeleton needs {NUM_JOINTS} joints, got {len(parents)}")
        if offsets.shape != (NUM_JOINTS, 3):
            raise ShapeMismatchError(f"rest_offsets must be (24, 3), got {offsets.shape}")
        if not np.all(np.isfinite(offsets)):
            raise ValidationError("rest_offsets contain non-finite values")
        if parents[0] != -1:
            raise ValidationError("joint 0 must be the root (parent -1)")
        for j, p in enumerate(parents[1:], start=1):
            if not 0 <= p < NUM_JOINTS or p == j:
                raise ValidationError(f"joint {j} has invalid parent {p}")
        order = _topological_order(parents)
        offsets.setflags(write=False)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "rest_offsets", offsets)
        object.__setattr__(self, "_order", order)

    def __eq__(self, other):
        if not isinstance(other, Skeleton):
            return NotImplemented
        return (self.parents == other.parents
                and np.array_equal(self.rest_offsets, other.rest_offsets))

    @property
    def order(self):
        """Joint indices with every parent before its children."""
        return self._order

    def rest_positions(self):
        """Global rest-pose joint positions (cumulative offsets), ``(24, 3)``."""
        pos = np.zeros((NUM_JOINTS, 3))
        for j in self.order[1:]:
            pos[j] = pos[self.parents[j]] + self.rest_offsets[j]
        return pos


def _topological_order(parents):
    children = {j: [] for j in range(len(parents))}
    for j, p in enumerate(parents):
        if p >= 0:
            children[p].append(j)
    order, stack = [], [0]
    while stack:
        j = stack.pop()
        order.append(j)
        stack.extend(reversed(children[j]))
    if len(order) != len(parents):
        raise ValidationError("parent array does not form a tree rooted at joint 0")
    return tuple(order)


def default_skeleton():
    """The shipped SMPL-compatible 24-joint skeleton."""
    text = resources.files("beatsync").joinpath("data/smpl_skeleton.json").read_text()
    data = json.loads(text)
    return Skeleton(data["parents"], data["rest_offsets"])


def identity_rot6d(shape=()):
    """6-DOF encoding of the identity rotation, broadcast to ``shape + (6,)``."""
    return np.broadcast_to(np.array([1.0, 0, 0, 0, 1.0, 0]), tuple(shape) + (6,)).copy()


def matrix_to_rot6d(R):
    """Inverse of :func:`rot6d_to_matrix`: the first two columns."""
    R = np.asarray(R, dtype=np.float64)
    return np.concatenate([R[..., :, 0], R[..., :, 1]], axis=-1)


def _gram_schmidt(r6):
    a1, a2 = r6[..., :3], r6[..., 3:]
    n1 = np.linalg.norm(a1, axis=-1)
    n2 = np.linalg.norm(a2, axis=-1)
    bad = ~(n1 > _TINY)
    b1 = a1 / np.where(bad, 1.0, n1)[..., None]
    u2 = a2 - np.sum(b1 * a2, axis=-1, keepdims=True) * b1
    nu = np.linalg.norm(u2, axis=-1)
    bad |= ~(nu > _PARALLEL_TOL * n2) | ~(n2 > _TINY)
    b2 = u2 / np.where(bad, 1.0, nu)[..., None]
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=-1), bad


def rot6d_to_matrix(r6):
    """Decode 6-DOF rotations to rotation matrices.

    The two 3-vectors are orthonormalised by Gram-Schmidt and form the first
    two columns; the third column is their cross product. Works on any
    leading batch shape ``(..., 6) -> (..., 3, 3)``.

    Raises DegenerateRotationError when the first vector is zero or the
    vectors are parallel.
    """
    r6 = np.asarray(r6, dtype=np.float64)
    if r6.shape[-1:] != (6,):
        raise ShapeMismatchError(f"expected trailing dimension 6, got {r6.shape}")
    R, bad = _gram_schmidt(r6)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        where = f" at index {idx}" if idx else ""
        raise DegenerateRotationError(f"degenerate 6-DOF rotation{where}")
    return R


def forward_kinematics(seq, skel):
    """Global joint positions ``(L, 24, 3)`` of a motion sequence.

    Joint 0 sits at the root translation; every other joint is its parent's
    position plus the parent's global rotation applied to the rest offset.
    """
    rot6 = seq.rotations
    local, bad = _gram_schmidt(rot6)
    if np.any(bad):
        frame, joint = (int(i) for i in np.argwhere(bad)[0])
        raise DegenerateRotationError("degenerate 6-DOF rotation", frame=frame, joint=joint)
    L = len(seq)
    glob = np.empty((L, NUM_JOINTS, 3, 3))
    pos = np.empty((L, NUM_JOINTS, 3))
    glob[:, 0] = local[:, 0]
    pos[:, 0] = seq.root_translation
    offsets = skel.rest_offsets
    for j in skel.order[1:]:
        p = skel.parents[j]
        glob[:, j] = glob[:, p] @ local[:, j]
        pos[:, j] = pos[:, p] + glob[:, p] @ offsets[j]
    return pos


def forward_difference(x, fps):
    """``(x[i+1] - x[i]) * fps`` along axis 0, last element replicated."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise SequenceTooShortError(f"need at least 2 frames, got {x.shape[0]}")
    d = np.diff(x, axis=0) * fps
    return np.concatenate([d, d[-1:]], axis=0)


def second_difference(x, fps):
    """``(x[i+2] - 2 x[i+1] + x[i]) * fps**2`` along axis 0.

    The last valid value is replicated so the result keeps length L.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 3:
        raise SequenceTooShortError(f"need at least 3 frames, got {x.shape[0]}")
    d = np.diff(np.diff(x, axis=0) * fps, axis=0) * fps
    return np.concatenate([d, d[-1:], d[-1:]], axis=0)


def joint_velocity(pos, fps):
    return forward_difference(pos, fps)


def joint_acceleration(pos, fps):
    return second_difference(pos, fps)


def mean_joint_speed(pos, fps):
    """Per-frame mean over joints of the velocity norm, length L."""
    v = joint_velocity(pos, fps)
    return np.linalg.norm(v, axis=-1).mean(axis=-1)
