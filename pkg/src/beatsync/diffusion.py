"""x0-parameterised DDPM: cosine schedule, forward diffusion, ancestral
sampling with keyframe constraint injection and classifier-free guidance.

Steps are 1-based: ``t = 1`` is the least noisy level and ``t = T`` the
noisiest; level ``t = 0`` denotes clean data.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingError, ShapeMismatchError, ValidationError
from .motion import POSE_DIM, MotionSequence

MAX_BETA = 0.999


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    betas: np.ndarray
    kind: str = "custom"
    offset: float | None = None

    def __post_init__(self):
        betas = np.array(self.betas, dtype=np.float64).reshape(-1)
        if betas.size < 1:
            raise ValidationError("schedule needs at least one step")
        if np.any(betas <= 0) or np.any(betas > MAX_BETA):
            raise ValidationError(f"betas must lie in (0, {MAX_BETA}]")
        alphas = 1.0 - betas
        alpha_bars = np.cumprod(alphas)
        for arr in (betas, alphas, alpha_bars):
            arr.setflags(write=False)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", alpha_bars)

    def __eq__(self, other):
        if not isinstance(other, NoiseSchedule):
            return NotImplemented
        return (self.kind == other.kind and self.offset == other.offset
                and np.array_equal(self.betas, other.betas))

    @property
    def T(self):
        return self.betas.size

    def alpha_bar(self, t):
        """Cumulative signal fraction at level ``t`` (1.0 at ``t = 0``)."""
        return 1.0 if t == 0 else float(self.alpha_bars[t - 1])

    def beta(self, t):
        return float(self.betas[t - 1])

    def alpha(self, t):
        return float(self.alphas[t - 1])


def cosine_schedule(T, offset=0.008):
    """Cosine schedule with betas clipped at 0.999."""
    if int(T) != T or T < 1:
        raise ValidationError(f"T must be a positive integer, got {T}")
    steps = np.arange(T + 1, dtype=np.float64)
    f = np.cos(((steps / T + offset) / (1.0 + offset)) * np.pi / 2.0) ** 2
    abar = f / f[0]
    betas = np.minimum(1.0 - abar[1:] / abar[:-1], MAX_BETA)
    return NoiseSchedule(betas, kind="cosine", offset=offset)


def _check_t(t, sched, allow_zero=False):
    lo = 0 if allow_zero else 1
    if not lo <= t <= sched.T:
        raise ValidationError(f"step {t} outside [{lo}, {sched.T}]")


def forward_diffuse(x0, t, noise, sched):
    """Closed-form ``q(x_t | x_0)``: ``sqrt(abar) x0 + sqrt(1 - abar) noise``.

    ``t = 0`` returns ``x0`` unchanged.
    """
    _check_t(t, sched, allow_zero=True)
    x0 = np.asarray(x0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != x0.shape:
        raise ShapeMismatchError(f"noise shape {noise.shape} != x0 shape {x0.shape}")
    if t == 0:
        return x0.copy()
    ab = sched.alpha_bar(t)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


def posterior_coefficients(t, sched):
    """``(coef_x0, coef_xt, sigma)`` of ``q(x_{t-1} | x_t, x_0)``."""
    _check_t(t, sched)
    ab, ab_prev = sched.alpha_bar(t), sched.alpha_bar(t - 1)
    beta, alpha = sched.beta(t), sched.alpha(t)
    coef_x0 = np.sqrt(ab_prev) * beta / (1.0 - ab)
    coef_xt = np.sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab)
    var = beta * (1.0 - ab_prev) / (1.0 - ab)
    return coef_x0, coef_xt, np.sqrt(var)


def posterior_step(x_t, x0_hat, t, noise, sched):
    """One ancestral step ``x_t -> x_{t-1}`` given the predicted clean sample.

    At ``t = 1`` the result is ``x0_hat`` exactly.
    """
    _check_t(t, sched)
    x_t = np.asarray(x_t, dtype=np.float64)
    x0_hat = np.asarray(x0_hat, dtype=np.float64)
    if x_t.shape != x0_hat.shape:
        raise ShapeMismatchError(f"x_t {x_t.shape} and x0_hat {x0_hat.shape} differ")
    if t == 1:
        return x0_hat.copy()
    coef_x0, coef_xt, sigma = posterior_coefficients(t, sched)
    return coef_x0 * x0_hat + coef_xt * x_t + sigma * np.asarray(noise, dtype=np.float64)


def _broadcast_mask(mask, shape):
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim == 1 and len(shape) == 2 and m.shape[0] == shape[0]:
        m = m[:, None]
    try:
        return np.broadcast_to(m, shape)
    except ValueError:
        raise ShapeMismatchError(f"mask shape {np.shape(mask)} incompatible with {shape}") from None


def apply_constraint(x_t, x_c, mask, t, noise, sched):
    """Replace constrained entries of ``x_t`` with the constraint diffused to ``t``.

    ``mask`` is either entrywise (same shape as ``x_t``) or per-frame.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    x_c = np.asarray(x_c, dtype=np.float64)
    if x_c.shape != x_t.shape:
        raise ShapeMismatchError(f"constraint shape {x_c.shape} != {x_t.shape}")
    m = _broadcast_mask(mask, x_t.shape) != 0
    x_ct = forward_diffuse(x_c, t, noise, sched)
    return np.where(m, x_ct, x_t)


def cfg_combine(x0_cond, x0_uncond, scale):
    """Guided prediction ``uncond + scale * (cond - uncond)``.

    Evaluated as ``scale * cond + (1 - scale) * uncond`` so scales 0, 1 and 2
    reproduce ``uncond``, ``cond`` and ``2 cond - uncond`` bit for bit.
    """
    x0_cond = np.asarray(x0_cond, dtype=np.float64)
    x0_uncond = np.asarray(x0_uncond, dtype=np.float64)
    if x0_cond.shape != x0_uncond.shape:
        raise ShapeMismatchError(f"{x0_cond.shape} vs {x0_uncond.shape}")
    return scale * x0_cond + (1.0 - scale) * x0_uncond


@dataclass(frozen=True, eq=False)
class Constraint:
    reference: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class SamplerConfig:
    guidance_scale: float = 2.0
    seed: int = 0
    constraint: Constraint | None = None
    # condition passed to the denoiser; None means unconditional sampling
    condition: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.guidance_scale < 0:
            raise ValidationError("guidance_scale must be >= 0")


def make_rng(seed):
    """Counter-based Philox generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.Philox(int(seed)))


# built-in denoisers: callables (x_t, t, condition) -> predicted x0

def identity_denoiser(x_t, t, condition=None):
    return np.array(x_t, copy=True)


class ConstantDenoiser:
    """Oracle that always predicts the same clean sample."""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=np.float64)

    def __call__(self, x_t, t, condition=None):
        if np.shape(x_t) != self.target.shape:
            raise ShapeMismatchError(f"x_t {np.shape(x_t)} != target {self.target.shape}")
        return self.target.copy()


def ground_truth_denoiser(seq):
    """Perfect oracle returning a known clean motion."""
    return ConstantDenoiser(seq.frames)


def _predict(denoiser, x, t, cfg):
    if cfg.condition is None or cfg.guidance_scale == 1.0:
        x0 = denoiser(x, t, cfg.condition)
    else:
        x0 = cfg_combine(denoiser(x, t, cfg.condition), denoiser(x, t, None),
                         cfg.guidance_scale)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != x.shape:
        raise ShapeMismatchError(f"denoiser returned shape {x0.shape}, expected {x.shape}")
    return x0


def sample_array(denoiser, cfg, sched, length, dim):
    """Ancestral sampling from ``x_T ~ N(0, I)`` down to ``x_0``.

    After every posterior step the constraint (if any) is re-imposed at the
    new noise level, so masked entries of the output equal the reference.
    """
    rng = make_rng(cfg.seed)
    shape = (int(length), int(dim))
    x = rng.standard_normal(shape)
    con = cfg.constraint
    for t in range(sched.T, 0, -1):
        try:
            x0_hat = _predict(denoiser, x, t, cfg)
        except Exception as exc:
            raise SamplingError(f"denoiser failed: {exc}", step=t) from exc
        noise = rng.standard_normal(shape)
        x = posterior_step(x, x0_hat, t, noise, sched)
        if con is not None:
            x = apply_constraint(x, con.reference, con.mask, t - 1,
                                 rng.standard_normal(shape), sched)
        if not np.all(np.isfinite(x)):
            raise SamplingError("non-finite sample", step=t)
    return x


def sample(denoiser, cfg, sched, length, dim=POSE_DIM, fps=30.0):
    """Sample a motion sequence; ``dim`` must be the pose dimension."""
    if dim != POSE_DIM:
        raise ValidationError(f"motion samples need dim {POSE_DIM}; use sample_array")
    return MotionSequence(fps, sample_array(denoiser, cfg, sched, length, dim))
