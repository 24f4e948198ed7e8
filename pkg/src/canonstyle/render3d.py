"""Camera math, ray generation, and differentiable volume rendering.

Convention: world is y-up right-handed; the camera sits on a sphere of
given radius looking at the origin, yaw about world-up then pitch about
camera-right. The canonical view (0, 0) puts the camera on +z looking
toward -z with an identity-aligned rotation.
"""

import numpy as np
import torch

from . import _kernels
from .types import (CameraPose, ConfigurationError, DomainError, RayBatch,
                    RenderSettings, ShapeError, ViewDirection)


def make_camera(view, fov, radius):
    if radius <= 0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    if not 0 < fov < np.pi:
        raise ConfigurationError(f"fov must lie in (0, pi), got {fov}")
    y, p = view.yaw, view.pitch
    origin = radius * np.array([np.cos(p) * np.sin(y),
                                np.sin(p),
                                np.cos(p) * np.cos(y)])
    backward = origin / radius                      # unit vector camera -> +z_cam
    world_up = np.array([0.0, 1.0, 0.0])
    right = np.cross(world_up, backward)
    nr = np.linalg.norm(right)
    if nr < 1e-9:  # looking straight up/down; pick a stable right axis
        right = np.array([np.cos(y), 0.0, -np.sin(y)])
    else:
        right = right / nr
    up = np.cross(backward, right)
    rotation = np.stack([right, up, backward], axis=1)
    return CameraPose(origin=origin, rotation=rotation, fov=float(fov),
                      radius=float(radius))


def generate_rays(camera, resolution):
    h, w = resolution
    if h < 1 or w < 1:
        raise ConfigurationError(f"resolution must be positive, got {resolution}")
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    half = np.tan(camera.fov / 2.0)
    u = ((cols + 0.5) / w * 2.0 - 1.0) * half * (w / h)
    v = (1.0 - (rows + 0.5) / h * 2.0) * half
    dirs_cam = np.stack([u, v, -np.ones_like(u)], axis=-1).reshape(-1, 3)
    dirs = dirs_cam @ camera.rotation.T
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    origins = np.broadcast_to(camera.origin, dirs.shape).copy()
    pixel_index = np.stack([rows.reshape(-1), cols.reshape(-1)], axis=-1)
    return RayBatch(origins=origins, directions=dirs, pixel_index=pixel_index)


def composite(densities, colors, deltas, background):
    """Alpha-composite per-ray samples; returns (pixel_colors, transmittance).

    densities (N, S) >= 0, colors (N, S, 3), deltas (N, S) > 0,
    background (3,). Gradients flow through densities and colors.
    """
    densities = torch.as_tensor(densities)
    colors = torch.as_tensor(colors)
    deltas = torch.as_tensor(deltas)
    background = torch.as_tensor(background, dtype=densities.dtype)
    if densities.shape != deltas.shape or colors.shape[:2] != densities.shape:
        raise ShapeError("densities, colors, deltas disagree on (N, S)")
    with torch.no_grad():
        if (densities < 0).any():
            raise DomainError("negative density")
        if (deltas <= 0).any():
            raise DomainError("deltas must be positive")
    return _kernels.compose(densities, colors, deltas, background)


def sample_depths(n_rays, settings, rng=None, dtype=torch.float32):
    """Per-ray sample depths in [near, far]; midpoint or stratified-jittered."""
    s = settings.samples_per_ray
    step = (settings.far - settings.near) / s
    base = torch.arange(s, dtype=dtype) * step + settings.near
    if settings.stratified:
        if rng is None:
            raise ConfigurationError("stratified sampling needs an RNG")
        jitter = torch.as_tensor(rng.random((n_rays, s)), dtype=dtype)
        depths = base + jitter * step
    else:
        depths = (base + 0.5 * step).expand(n_rays, s)
    deltas = torch.full((n_rays, s), step, dtype=dtype)
    return depths, deltas


def render_rays(field, rays, settings, resolution=None, rng=None,
                ray_chunk=2048, dtype=torch.float32):
    """Volume-render a ray batch against a field callable.

    field(points (P, 3), dirs (P, 3)) -> (sigma (P,), rgb (P, 3)), both torch
    tensors; the result stays differentiable with respect to the field's
    parameters. Returns an (H, W, 3) torch image in [0, 1].
    """
    n = rays.directions.shape[0]
    if resolution is None:
        side = int(round(np.sqrt(n)))
        resolution = (side, side)
    origins = torch.as_tensor(rays.origins, dtype=dtype)
    dirs = torch.as_tensor(rays.directions, dtype=dtype)
    background = torch.as_tensor(settings.background_color, dtype=dtype)
    rows = torch.as_tensor(rays.pixel_index[:, 0], dtype=torch.long)
    cols = torch.as_tensor(rays.pixel_index[:, 1], dtype=torch.long)
    out_chunks = []
    for lo in range(0, n, ray_chunk):
        hi = min(lo + ray_chunk, n)
        o, d = origins[lo:hi], dirs[lo:hi]
        depths, deltas = sample_depths(hi - lo, settings, rng=rng, dtype=dtype)
        pts = o[:, None, :] + depths[..., None] * d[:, None, :]
        s = settings.samples_per_ray
        flat_pts = pts.reshape(-1, 3)
        flat_dirs = d[:, None, :].expand(-1, s, -1).reshape(-1, 3)
        sigma, rgb = field(flat_pts, flat_dirs)
        pixel, _ = _kernels.compose(sigma.reshape(hi - lo, s),
                                    rgb.reshape(hi - lo, s, 3),
                                    deltas, background)
        out_chunks.append(pixel)
    flat = torch.cat(out_chunks, dim=0)
    # compositing is a convex combination of sample colors and background,
    # so the image is already in [0, 1] up to rounding
    image = torch.zeros((resolution[0], resolution[1], 3), dtype=dtype)
    return image.index_put((rows, cols), flat)
