"""Procedural portrait dataset: ray-traced blob heads with sealed labels.

Heads are shaded ellipsoids with painted eyes and a curvature-coded mouth,
rendered analytically (independent of the neural renderer) at poses drawn
from the configured distribution. Images carry no pose metadata; a separate
labels file under oracle/ exists for evaluation only and must never feed a
training path.
"""

import colorsys
import json
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage

from .render3d import generate_rays, make_camera
from .types import ConfigurationError, PoseDistribution, ViewDirection

HEAD_AXES = np.array([0.25, 0.29, 0.24])   # ellipsoid semi-axes, aspect scales x
EYE_HEIGHT = 0.32
EYE_RADIUS = 0.17
MOUTH_ELEVATION = -0.42
MOUTH_HALF_WIDTH = 0.46
MOUTH_THICKNESS = 0.07
MOUTH_CURVE_GAIN = 0.28
LIGHT_DIR = np.array([0.35, 0.5, 0.78])
AMBIENT = 0.42

POSTER_LEVELS_U8 = (26, 77, 128, 179, 230)
EDGE_DARK_U8 = tuple(int(round(v * 0.3)) for v in POSTER_LEVELS_U8)
EDGE_THRESHOLD = 0.18


@dataclass(frozen=True)
class IdentityFactors:
    head_color: tuple       # RGB in [0,1]
    eye_spacing: float      # lateral offset of eye centers, face-sphere units
    head_aspect: float      # x-axis scale of the head ellipsoid
    mouth_curve: float      # in [-1, 1]; positive curls the mouth upward


@dataclass(frozen=True)
class SyntheticSpec:
    n_identities: int
    poses_per_identity: int
    pose_dist: PoseDistribution = field(default_factory=PoseDistribution)
    style_filter: str = "none"            # "none" | "cartoon"
    resolution: int = 64
    eye_spacing_range: tuple = (0.30, 0.55)
    head_aspect_range: tuple = (0.85, 1.15)
    mouth_curve_range: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.n_identities <= 0 or self.poses_per_identity <= 0:
            raise ConfigurationError("identity and pose counts must be positive")
        if self.style_filter not in ("none", "cartoon"):
            raise ConfigurationError(f"unknown style_filter '{self.style_filter}'")


def sample_identity(rng, spec):
    hue = rng.uniform(0.0, 1.0)
    sat = rng.uniform(0.30, 0.62)
    val = rng.uniform(0.62, 0.95)
    rgb = colorsys.hsv_to_rgb(hue, sat, val)
    return IdentityFactors(
        head_color=tuple(float(c) for c in rgb),
        eye_spacing=float(rng.uniform(*spec.eye_spacing_range)),
        head_aspect=float(rng.uniform(*spec.head_aspect_range)),
        mouth_curve=float(rng.uniform(*spec.mouth_curve_range)),
    )


def render_head(identity, view, resolution, fov=0.35, radius=2.0, supersample=2):
    """Analytic ray-traced render of one head; returns (H, W, 3) float32."""
    res = resolution * supersample
    camera = make_camera(view, fov=fov, radius=radius)
    rays = generate_rays(camera, (res, res))
    o = rays.origins
    d = rays.directions
    axes = HEAD_AXES * np.array([identity.head_aspect, 1.0, 1.0])

    os_, ds = o / axes, d / axes
    a = (ds * ds).sum(-1)
    b = 2.0 * (os_ * ds).sum(-1)
    c = (os_ * os_).sum(-1) - 1.0
    disc = b * b - 4 * a * c
    hit = disc > 0
    t = np.where(hit, (-b - np.sqrt(np.maximum(disc, 0.0))) / (2 * a), np.inf)
    hit &= t > 0

    img = np.ones((res * res, 3), dtype=np.float64)
    if hit.any():
        p = o[hit] + t[hit, None] * d[hit]
        sphere = p / axes                       # unit "face direction" space
        normal = p / (axes ** 2)
        normal /= np.linalg.norm(normal, axis=-1, keepdims=True)

        albedo = np.broadcast_to(np.asarray(identity.head_color), p.shape).copy()
        # eyes: angular discs around two fixed face directions
        for side in (-1.0, 1.0):
            center = np.array([side * identity.eye_spacing, EYE_HEIGHT, 1.0])
            center /= np.linalg.norm(center)
            mask = sphere @ center > np.cos(EYE_RADIUS)
            albedo[mask] = (0.08, 0.08, 0.12)
        # mouth: band around a curved elevation profile, front hemisphere only
        lateral = np.arctan2(sphere[:, 0], sphere[:, 2])
        elevation = np.arcsin(np.clip(sphere[:, 1], -1.0, 1.0))
        u = lateral / MOUTH_HALF_WIDTH
        target = MOUTH_ELEVATION + identity.mouth_curve * MOUTH_CURVE_GAIN * (u * u - 0.5)
        mouth = (np.abs(u) < 1.0) & (sphere[:, 2] > 0) \
            & (np.abs(elevation - target) < MOUTH_THICKNESS)
        albedo[mouth] = (0.45, 0.10, 0.12)

        light = LIGHT_DIR / np.linalg.norm(LIGHT_DIR)
        shade = AMBIENT + (1 - AMBIENT) * np.maximum(normal @ light, 0.0)
        img[hit] = albedo * shade[:, None]

    img = img.reshape(res, res, 3)
    if supersample > 1:
        img = img.reshape(resolution, supersample, resolution, supersample, 3)
        img = img.mean(axis=(1, 3))
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def cartoon_filter(image):
    """Posterize to 5 fixed channel levels and darken luminance edges.

    Works in uint8 space so every output channel value comes from an exact,
    enumerable level set: POSTER_LEVELS_U8 for flat pixels, EDGE_DARK_U8 on
    edge pixels.
    """
    u8 = np.round(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    idx = np.minimum(u8.astype(np.int32) * 5 // 256, 4)
    poster = np.asarray(POSTER_LEVELS_U8, dtype=np.uint8)[idx]

    lum = image.mean(axis=-1)
    gx = np.zeros_like(lum)
    gy = np.zeros_like(lum)
    gx[:, 1:-1] = lum[:, 2:] - lum[:, :-2]
    gy[1:-1, :] = lum[2:, :] - lum[:-2, :]
    edge = np.hypot(gx, gy) > EDGE_THRESHOLD

    dark = np.asarray(EDGE_DARK_U8, dtype=np.uint8)[idx]
    out = np.where(edge[..., None], dark, poster)
    return out.astype(np.float32) / 255.0


def save_image(image, path):
    u8 = np.round(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    PILImage.fromarray(u8, mode="RGB").save(path, format="PNG")


def load_image(path):
    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    return arr


class ImageDataset:
    """In-memory stack of square RGB images plus their source file names."""

    def __init__(self, images, names=None):
        self.images = np.asarray(images, dtype=np.float32)
        if self.images.ndim != 4 or self.images.shape[-1] != 3:
            raise ConfigurationError("expected (N, H, W, 3) image stack")
        self.names = list(names) if names is not None else \
            [f"im_{i:05d}.png" for i in range(len(self.images))]

    def __len__(self):
        return len(self.images)

    def __getitem__(self, i):
        return self.images[i]

    @property
    def resolution(self):
        return self.images.shape[1]

    @staticmethod
    def from_dir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".png"))
        if not names:
            raise ConfigurationError(f"no images under {path}")
        images = np.stack([load_image(os.path.join(path, n)) for n in names])
        return ImageDataset(images, names)

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        for name, img in zip(self.names, self.images):
            save_image(img, os.path.join(path, name))


def generate_synthetic_dataset(spec, seed, out_dir=None):
    """Render the dataset; returns (ImageDataset, labels list).

    Labels (identity id, pose, generation factors) are evaluation-only; when
    out_dir is given they are sealed under out_dir/oracle/labels.jsonl while
    images go to out_dir/images/.
    """
    rng = np.random.default_rng(seed)
    images, labels, names = [], [], []
    count = 0
    for ident_id in range(spec.n_identities):
        identity = sample_identity(rng, spec)
        for _ in range(spec.poses_per_identity):
            view = spec.pose_dist.sample(rng)
            img = render_head(identity, view, spec.resolution)
            if spec.style_filter == "cartoon":
                img = cartoon_filter(img)
            name = f"im_{count:05d}.png"
            images.append(img)
            names.append(name)
            labels.append({
                "file": name,
                "identity": ident_id,
                "yaw": view.yaw,
                "pitch": view.pitch,
                "head_color": list(identity.head_color),
                "eye_spacing": identity.eye_spacing,
                "head_aspect": identity.head_aspect,
                "mouth_curve": identity.mouth_curve,
            })
            count += 1
    ds = ImageDataset(np.stack(images), names)
    if out_dir is not None:
        ds.save(os.path.join(out_dir, "images"))
        oracle_dir = os.path.join(out_dir, "oracle")
        os.makedirs(oracle_dir, exist_ok=True)
        with open(os.path.join(oracle_dir, "labels.jsonl"), "w") as f:
            for rec in labels:
                f.write(json.dumps(rec, sort_keys=True) + "\n")
    return ds, labels


def load_labels(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
