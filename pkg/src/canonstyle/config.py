"""Run configuration: a plain-text key/value tree (YAML) committed per run.

One RunConfig covers every stage of a run; stages verify the stored config
hash before consuming a checkpoint, so a run directory is internally
consistent by construction.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import yaml

from .types import ConfigurationError


@dataclass
class RenderConfig:
    near: float = 1.2
    far: float = 2.8
    radius: float = 2.0
    fov: float = 0.35
    samples_train: int = 24
    samples_eval: int = 64
    background: tuple = (1.0, 1.0, 1.0)


@dataclass
class PoseConfig:
    yaw: tuple = (-0.5, 0.5)
    pitch: tuple = (-0.25, 0.25)


@dataclass
class DataConfig:
    n_identities: int = 48
    poses_per_identity: int = 25
    eval_identities: int = 10
    eval_poses_per_identity: int = 20
    style_images: int = 600


@dataclass
class NerfConfig:
    steps: int = 2000
    batch: int = 2
    lr_generator: float = 2e-4
    lr_discriminator: float = 2e-4
    r1_weight: float = 1.0
    low_res_fraction: float = 0.8   # fraction of steps rendered at half res
    warmup_steps: int = 150         # unsupervised mean-image warm start
    hidden: int = 64
    layers: int = 4
    first_layer_scale: float = 6.0


@dataclass
class StylegenConfig:
    steps: int = 1500
    batch: int = 4
    lr: float = 2e-3
    r1_weight: float = 2.0
    channels: tuple = (128, 128, 64, 48, 32)  # 4^2 ... 64^2
    mapping_layers: int = 3


@dataclass
class TransferConfig:
    steps: int = 1000
    batch: int = 4
    lr: float = 1e-3
    r1_weight: float = 2.0


@dataclass
class EncoderConfig:
    steps: int = 2000
    batch: int = 8
    lr: float = 1e-3
    w_reg: float = 0.01
    lpips_weight: float = 0.5
    include_pair_renders: bool = True


@dataclass
class MapperConfig:
    steps: int = 3000
    batch: int = 8
    lr: float = 1e-4
    hidden: int = 512
    mapped_rows: int = 4
    cache_pairs: int = 600
    use_cache: bool = True


@dataclass
class LossConfig:
    lambda_latent: float = 10.0
    lambda_rec: float = 1.0
    lambda_lpips: float = 1.0


@dataclass
class EvalConfig:
    oracle_steps: int = 700
    embedder_steps: int = 700
    batch: int = 32
    n_eval_images: int = 200
    edit_samples: int = 100


@dataclass
class RunConfig:
    resolution: int = 64
    z_dim: int = 64
    w_dim: int = 128
    seed: int = 7
    render: RenderConfig = field(default_factory=RenderConfig)
    pose: PoseConfig = field(default_factory=PoseConfig)
    data: DataConfig = field(default_factory=DataConfig)
    nerf: NerfConfig = field(default_factory=NerfConfig)
    stylegen: StylegenConfig = field(default_factory=StylegenConfig)
    transfer: TransferConfig = field(default_factory=TransferConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    mapper: MapperConfig = field(default_factory=MapperConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    @property
    def n_wplus_rows(self):
        # two style inputs per synthesis block, blocks 4^2 .. resolution^2
        return 2 * int(math.log2(self.resolution)) - 2

    @property
    def n_blocks(self):
        return self.n_wplus_rows // 2

    def validate(self):
        r = self.resolution
        if r < 8 or r & (r - 1):
            raise ConfigurationError(f"resolution must be a power of two >= 8, got {r}")
        if self.mapper.mapped_rows > self.n_wplus_rows:
            raise ConfigurationError("mapped_rows exceeds the W+ row count")
        if len(self.stylegen.channels) != self.n_blocks:
            raise ConfigurationError(
                f"stylegen.channels must list {self.n_blocks} blocks, "
                f"got {len(self.stylegen.channels)}")
        if min(self.loss.lambda_latent, self.loss.lambda_rec, self.loss.lambda_lpips) < 0:
            raise ConfigurationError("loss weights must be non-negative")
        for lo, hi in (self.pose.yaw, self.pose.pitch):
            if not lo <= 0 <= hi:
                raise ConfigurationError("pose ranges must contain 0")
        if not 0 < self.render.near < self.render.far:
            raise ConfigurationError("render bounds must satisfy 0 < near < far")
        return self


def _to_plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _to_plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _apply(dc, data, path=""):
    for key, val in data.items():
        if not hasattr(dc, key):
            raise ConfigurationError(f"unknown config key '{path}{key}'")
        cur = getattr(dc, key)
        if hasattr(cur, "__dataclass_fields__"):
            if not isinstance(val, dict):
                raise ConfigurationError(f"config key '{path}{key}' must be a mapping")
            _apply(cur, val, path=f"{path}{key}.")
        else:
            if isinstance(cur, tuple) and isinstance(val, list):
                val = tuple(tuple(v) if isinstance(v, list) else v for v in val)
            setattr(dc, key, val)


def load_config(path=None, overrides=None):
    """Build a RunConfig from defaults, an optional YAML file, and overrides."""
    cfg = RunConfig()
    if path is not None:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        _apply(cfg, data)
    for key, val in (overrides or {}).items():
        node = cfg
        *parents, leaf = key.split(".")
        for p in parents:
            node = getattr(node, p)
        setattr(node, leaf, val)
    return cfg.validate()


def save_config(cfg, path):
    with open(path, "w") as f:
        yaml.safe_dump(_to_plain(cfg), f, sort_keys=True)


def config_hash(cfg):
    """Stable content hash of the fully-resolved configuration."""
    blob = json.dumps(_to_plain(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def stage_seed(cfg, stage):
    """Deterministic per-stage seed derived from the run seed."""
    h = hashlib.sha256(f"{cfg.seed}/{stage}".encode()).digest()
    return int.from_bytes(h[:4], "little")
