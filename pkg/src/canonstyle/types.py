"""Shared value types for cameras, poses, schedules, and reports."""

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Input violates a numeric-domain precondition (negative density, ...)."""


class ShapeError(ValueError):
    """Tensor shape does not match the declared contract."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration / empty dataset."""


class DependencyError(RuntimeError):
    """A required stage artifact is missing from the run directory."""


class CompatibilityError(RuntimeError):
    """Checkpoint was produced under a different configuration."""


class IntegrityError(RuntimeError):
    """Checkpoint archive is corrupt or inconsistent."""


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss); carries the step index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class ViewDirection:
    """Camera pose angles in radians; (0, 0) is the canonical frontal view."""

    yaw: float
    pitch: float

    def __post_init__(self):
        if abs(self.yaw) > np.pi + 1e-9:
            raise DomainError(f"yaw {self.yaw} outside [-pi, pi]")
        if abs(self.pitch) > np.pi / 2 + 1e-9:
            raise DomainError(f"pitch {self.pitch} outside [-pi/2, pi/2]")


CANONICAL_VIEW = ViewDirection(0.0, 0.0)


@dataclass(frozen=True)
class CameraPose:
    origin: np.ndarray       # (3,)
    rotation: np.ndarray     # (3, 3), columns are right/up/backward axes
    fov: float               # full vertical field of view, radians
    radius: float


@dataclass(frozen=True)
class RayBatch:
    origins: np.ndarray      # (N, 3)
    directions: np.ndarray   # (N, 3), unit norm
    pixel_index: np.ndarray  # (N, 2) int (row, col)


@dataclass(frozen=True)
class RenderSettings:
    near: float = 1.2
    far: float = 2.8
    samples_per_ray: int = 24
    stratified: bool = False
    background_color: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not (0 < self.near < self.far):
            raise ConfigurationError(f"need 0 < near < far, got ({self.near}, {self.far})")
        if self.samples_per_ray < 2:
            raise ConfigurationError("samples_per_ray must be >= 2")
        if any(c < 0 or c > 1 for c in self.background_color):
            raise ConfigurationError("background_color channels must lie in [0, 1]")


@dataclass(frozen=True)
class PoseDistribution:
    yaw_range: tuple = (-0.5, 0.5)
    pitch_range: tuple = (-0.25, 0.25)

    def __post_init__(self):
        for lo, hi in (self.yaw_range, self.pitch_range):
            if not (lo <= 0.0 <= hi):
                raise ConfigurationError("pose ranges must contain the canonical pose 0")

    def sample(self, rng):
        return ViewDirection(float(rng.uniform(*self.yaw_range)),
                             float(rng.uniform(*self.pitch_range)))


@dataclass(frozen=True)
class BlendSchedule:
    """Per-synthesis-block source flags, ordered coarse to fine."""

    source_per_block: tuple  # each entry "base" or "transferred"

    def __post_init__(self):
        bad = [s for s in self.source_per_block if s not in ("base", "transferred")]
        if bad:
            raise ConfigurationError(f"unknown blend sources: {bad}")

    @staticmethod
    def default(n_blocks):
        # low-resolution blocks (4^2, 8^2) stay with the base generator
        return BlendSchedule(tuple("base" if i < 2 else "transferred"
                                   for i in range(n_blocks)))

    @staticmethod
    def all_base(n_blocks):
        return BlendSchedule(("base",) * n_blocks)

    @staticmethod
    def all_transferred(n_blocks):
        return BlendSchedule(("transferred",) * n_blocks)


@dataclass
class LossWeights:
    lambda_latent: float = 10.0
    lambda_rec: float = 1.0
    lambda_lpips: float = 1.0

    def __post_init__(self):
        if min(self.lambda_latent, self.lambda_rec, self.lambda_lpips) < 0:
            raise ConfigurationError("loss weights must be non-negative")


@dataclass
class MapperBatchLoss:
    """Differentiable loss terms; total is exactly the weighted combination."""

    latent: object  # scalar tensors
    rec: object
    lpips: object
    total: object

    def detach_floats(self):
        return {k: float(getattr(self, k)) for k in ("latent", "rec", "lpips", "total")}


@dataclass(frozen=True)
class EditDirection:
    name: str
    vector: np.ndarray  # (L, D), unit Frobenius norm

    def __post_init__(self):
        n = float(np.linalg.norm(self.vector))
        if abs(n - 1.0) > 1e-6:
            raise DomainError(f"direction '{self.name}' has norm {n}, expected 1")


@dataclass
class EvalReport:
    toy_fid: float
    identity_cosine_mean: float
    yaw_mae_before: float
    yaw_mae_after: float
    runtime_unified_ms: float
    runtime_cascaded_ms: float

    def __post_init__(self):
        vals = [self.toy_fid, self.identity_cosine_mean, self.yaw_mae_before,
                self.yaw_mae_after, self.runtime_unified_ms, self.runtime_cascaded_ms]
        if not all(np.isfinite(v) for v in vals):
            raise DomainError("EvalReport fields must be finite")
        if self.yaw_mae_before < 0 or self.yaw_mae_after < 0:
            raise DomainError("yaw MAE must be non-negative")


def validate_image(pixels):
    """H x W x 3 float array in [0, 1], square power-of-two resolution."""
    a = np.asarray(pixels)
    if a.ndim != 3 or a.shape[2] != 3 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected square HxWx3 image, got {a.shape}")
    h = a.shape[0]
    if h & (h - 1) or h == 0:
        raise ShapeError(f"resolution {h} is not a power of two")
    if not np.isfinite(a).all():
        raise DomainError("image contains non-finite values")
    if a.min() < -1e-6 or a.max() > 1 + 1e-6:
        raise DomainError("image channels must lie in [0, 1]")
    return a
