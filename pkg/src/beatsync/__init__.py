"""Numeric core for beat-synchronised, keyframe-controlled dance generation:
beat representations, beat-aware mask dilation, training losses with SMPL
forward kinematics, a constrained x0-prediction diffusion sampler and
evaluation metrics."""

from .beat import (
    BeatGrid,
    adjacent_interval,
    adjacent_intervals,
    beats_from_times,
    estimate_beat_distance,
    extract_motion_beats,
    nearest_beat_distance,
)
from .diffusion import (
    NoiseSchedule,
    SamplerConfig,
    apply_constraint,
    cfg_combine,
    cosine_schedule,
    forward_diffuse,
    posterior_step,
    sample,
)
from .errors import (
    BeatSyncError,
    DegenerateRotationError,
    NumericError,
    ValidationError,
)
from .harness import emit_plot_data, sample_keyframes, synth_motion
from .losses import LossReport, LossWeights, beat_loss, kin_loss, total_loss
from .masks import attention_mask, dilate_mask, dilation_step, masked_attention
from .metrics import (
    MetricConfig,
    MetricReport,
    beat_alignment_score,
    beat_assignment_precision,
    keypose_distance,
    kinetic_diversity,
    physical_foot_contact,
)
from .motion import (
    POSE_DIM,
    MotionSequence,
    Skeleton,
    default_skeleton,
    forward_kinematics,
    joint_acceleration,
    joint_velocity,
    mean_joint_speed,
    rot6d_to_matrix,
)

__version__ = "0.1.0"
