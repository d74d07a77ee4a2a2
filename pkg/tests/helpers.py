import numpy as np

from beatsync.motion import NUM_JOINTS, MotionSequence, identity_rot6d

ACCEPTANCE_LINES = []


def random_motion(rng, length, fps=30.0, jitter=0.3):
    """Random valid motion: perturbed identity rotations, random translation."""
    rot = identity_rot6d((length, NUM_JOINTS)) + jitter * rng.standard_normal((length, NUM_JOINTS, 6))
    return MotionSequence.from_parts(fps, rng.uniform(0, 1, (length, 4)),
                                     rng.standard_normal((length, 3)), rot)


def pose_motion(translation, fps=30.0, contacts=None, rotations=None):
    translation = np.asarray(translation, dtype=float)
    L = translation.shape[0]
    if contacts is None:
        contacts = np.zeros((L, 4))
    if rotations is None:
        rotations = identity_rot6d((L, NUM_JOINTS))
    return MotionSequence.from_parts(fps, contacts, translation, rotations)


def rot_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
