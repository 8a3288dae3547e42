"""Network assembly: config, weight inventory, forward pass, accounting.

Architecture: 1x1 head conv (3 -> D), B residual blocks of
SC layer -> ReLU -> 1x1 conv (+ optional attention on the branch),
a reconstruction head, and a bilinear-upscaled input skip:
output = recon(body(head(x))) + bilinear_upscale(x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .shiftconv import Conv1x1Weights, preset_steps, sc_layer_fused, sc_layer_naive
from .tensorops import check_nchw, pixel_shuffle, relu, resize

RECON_VARIANTS = ("PixelShuffle", "Nearest", "Bilinear", "TConv")
ATTENTION_VARIANTS = ("None", "CA", "SPA", "PA")
SCALES = (2, 3, 4, 8)

# (blocks, dim) of the published model sizes
NAMED_SIZES = {"T": (16, 64), "Base": (64, 64), "L": (32, 128)}

# Channel-attention bottleneck reduction ratio.
CA_REDUCTION = 4


@dataclass(frozen=True)
class ModelConfig:
    blocks: int
    dim: int
    scale: int
    preset: str = "Shift8"
    recon: str = "PixelShuffle"
    attention: str = "None"

    def __post_init__(self):
        if self.blocks < 1:
            raise ConfigError(f"blocks must be >= 1, got {self.blocks}")
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {SCALES}, got {self.scale}")
        n_groups = len(preset_steps(self.preset).steps)
        if self.dim < n_groups or self.dim % n_groups != 0:
            raise ConfigError(
                f"dim {self.dim} not divisible by {n_groups} shift groups"
            )
        if self.recon not in RECON_VARIANTS:
            raise ConfigError(f"unknown recon variant {self.recon!r}")
        if self.attention not in ATTENTION_VARIANTS:
            raise ConfigError(f"unknown attention variant {self.attention!r}")
        if self.attention == "CA" and self.dim % CA_REDUCTION != 0:
            raise ConfigError(f"dim {self.dim} not divisible by {CA_REDUCTION} for CA")

    @classmethod
    def named(cls, size: str, scale: int, **kwargs) -> "ModelConfig":
        """Config for a published model size: T, Base, or L."""
        if size not in NAMED_SIZES:
            raise ConfigError(f"unknown model size {size!r}")
        blocks, dim = NAMED_SIZES[size]
        return cls(blocks=blocks, dim=dim, scale=scale, **kwargs)


@dataclass
class Model:
    """Immutable weight table plus its config."""

    config: ModelConfig
    weights: dict[str, np.ndarray]


def _attention_inventory(cfg: ModelConfig, prefix: str) -> list[tuple[str, tuple]]:
    d = cfg.dim
    if cfg.attention == "CA":
        r = d // CA_REDUCTION
        return [
            (f"{prefix}.fc1.weight", (r, d)),
            (f"{prefix}.fc1.bias", (r,)),
            (f"{prefix}.fc2.weight", (d, r)),
            (f"{prefix}.fc2.bias", (d,)),
        ]
    if cfg.attention == "SPA":
        return [(f"{prefix}.conv.weight", (1, 2)), (f"{prefix}.conv.bias", (1,))]
    if cfg.attention == "PA":
        return [(f"{prefix}.conv.weight", (d, d)), (f"{prefix}.conv.bias", (d,))]
    return []


def layer_inventory(cfg: ModelConfig) -> list[tuple[str, tuple]]:
    """Ordered (name, shape) table implied by the config; the single
    source of truth for build, parameter accounting, and checkpoints."""
    d, s = cfg.dim, cfg.scale
    inv: list[tuple[str, tuple]] = [("head.weight", (d, 3)), ("head.bias", (d,))]
    for i in range(cfg.blocks):
        inv.append((f"block{i}.conv1.weight", (d, d)))
        inv.append((f"block{i}.conv1.bias", (d,)))
        inv.append((f"block{i}.conv2.weight", (d, d)))
        inv.append((f"block{i}.conv2.bias", (d,)))
        inv.extend(_attention_inventory(cfg, f"block{i}.att"))
    if cfg.recon == "PixelShuffle":
        inv += [
            ("recon.sc.weight", (d, d)), ("recon.sc.bias", (d,)),
            ("recon.up.weight", (3 * s * s, d)), ("recon.up.bias", (3 * s * s,)),
            ("recon.out.weight", (3, 3)), ("recon.out.bias", (3,)),
        ]
    elif cfg.recon in ("Nearest", "Bilinear"):
        inv += [
            ("recon.sc.weight", (d, d)), ("recon.sc.bias", (d,)),
            ("recon.out.weight", (3, d)), ("recon.out.bias", (3,)),
        ]
    else:  # TConv: s x s stride-s transposed conv D -> 3, then 1x1 conv 3 -> 3
        inv += [
            ("recon.tconv.weight", (3 * s * s, d)), ("recon.tconv.bias", (3,)),
            ("recon.out.weight", (3, 3)), ("recon.out.bias", (3,)),
        ]
    return inv


def build_model(cfg: ModelConfig, seed: int) -> Model:
    """Deterministic Kaiming-uniform fan-in init, biases zero."""
    rng = np.random.default_rng(seed)
    weights: dict[str, np.ndarray] = {}
    for name, shape in layer_inventory(cfg):
        if name.endswith(".bias"):
            weights[name] = np.zeros(shape, dtype=np.float32)
        else:
            bound = math.sqrt(1.0 / shape[1])
            weights[name] = rng.uniform(-bound, bound, size=shape).astype(np.float32)
    return Model(cfg, weights)


def count_params(cfg: ModelConfig) -> int:
    return sum(int(np.prod(shape)) for _, shape in layer_inventory(cfg))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _cv(weights: dict, name: str) -> Conv1x1Weights:
    return Conv1x1Weights(weights[name + ".weight"], weights[name + ".bias"])


def apply_attention(kind: str, f: np.ndarray, params: dict, want_cache: bool = False):
    """Gate the feature map with the configured attention module.

    params holds the module's weight table with short names
    (fc1.weight / fc2.weight for CA, conv.weight for SPA and PA).
    """
    f = check_nchw(f)
    if kind == "CA":
        w1, b1 = params["fc1.weight"], params["fc1.bias"]
        w2, b2 = params["fc2.weight"], params["fc2.bias"]
        pool = f.mean(axis=(2, 3))
        h1 = pool @ w1.T.astype(f.dtype) + b1.astype(f.dtype)
        r = np.maximum(h1, 0)
        z = r @ w2.T.astype(f.dtype) + b2.astype(f.dtype)
        a = _sigmoid(z)
        out = f * a[:, :, None, None]
        cache = {"in": f, "pool": pool, "h1": h1, "r": r, "a": a}
    elif kind == "SPA":
        w = params["conv.weight"].astype(f.dtype)
        b = params["conv.bias"].astype(f.dtype)
        mean_map = f.mean(axis=1)
        argmax = f.argmax(axis=1)
        max_map = np.take_along_axis(f, argmax[:, None], axis=1)[:, 0]
        t = w[0, 0] * mean_map + w[0, 1] * max_map + b[0]
        a = _sigmoid(t)
        out = f * a[:, None]
        cache = {"in": f, "mean": mean_map, "max": max_map, "argmax": argmax, "a": a}
    elif kind == "PA":
        from .shiftconv import conv1x1

        z = conv1x1(f, Conv1x1Weights(params["conv.weight"], params["conv.bias"]))
        a = _sigmoid(z)
        out = f * a
        cache = {"in": f, "a": a}
    else:
        raise ConfigError(f"unknown attention kind {kind!r}")
    return (out, cache) if want_cache else out


def _att_params(weights: dict, prefix: str) -> dict:
    plen = len(prefix) + 1
    return {k[plen:]: v for k, v in weights.items() if k.startswith(prefix + ".")}


def forward(model: Model, lr: np.ndarray, impl: str = "fused",
            want_cache: bool = False):
    """Super-resolve a batch of LR images; output is not clamped."""
    from .shiftconv import conv1x1

    if impl == "fused":
        sc = sc_layer_fused
    elif impl == "naive":
        sc = sc_layer_naive
    else:
        raise ConfigError(f"unknown impl {impl!r}")
    x = check_nchw(lr, "input")
    if x.shape[1] != 3:
        raise ShapeError(f"input must have 3 channels, got {x.shape[1]}")
    cfg = model.config
    weights = model.weights
    dtype = weights["head.weight"].dtype
    x = np.ascontiguousarray(x, dtype=dtype)
    steps = preset_steps(cfg.preset)
    s = cfg.scale
    hr_h, hr_w = x.shape[2] * s, x.shape[3] * s

    cache: dict = {"input": x, "blocks": []}
    cur = conv1x1(x, _cv(weights, "head"))
    for i in range(cfg.blocks):
        bc = {"in": cur}
        t = sc(cur, _cv(weights, f"block{i}.conv1"), steps)
        r = relu(t)
        branch = conv1x1(r, _cv(weights, f"block{i}.conv2"))
        bc["sc"] = t
        bc["relu"] = r
        if cfg.attention != "None":
            bc["branch"] = branch
            branch, bc["att"] = apply_attention(
                cfg.attention, branch, _att_params(weights, f"block{i}.att"),
                want_cache=True,
            )
        cur = cur + branch
        cache["blocks"].append(bc)

    rc: dict = {"in": cur}
    if cfg.recon == "PixelShuffle":
        t = sc(cur, _cv(weights, "recon.sc"), steps)
        r = relu(t)
        up = conv1x1(r, _cv(weights, "recon.up"))
        ps = pixel_shuffle(up, s)
        rec = conv1x1(ps, _cv(weights, "recon.out"))
        rc.update(sc=t, relu=r, ps=ps)
    elif cfg.recon in ("Nearest", "Bilinear"):
        resized = resize(cur, hr_h, hr_w, cfg.recon.lower())
        t = sc(resized, _cv(weights, "recon.sc"), steps)
        r = relu(t)
        rec = conv1x1(r, _cv(weights, "recon.out"))
        rc.update(resized=resized, sc=t, relu=r)
    else:  # TConv
        zero_bias = np.zeros(3 * s * s, dtype=dtype)
        up = conv1x1(cur, Conv1x1Weights(weights["recon.tconv.weight"], zero_bias))
        ps = pixel_shuffle(up, s) + weights["recon.tconv.bias"].astype(dtype)[None, :, None, None]
        rec = conv1x1(ps, _cv(weights, "recon.out"))
        rc.update(ps=ps)
    cache["recon"] = rc

    out = rec + resize(x, hr_h, hr_w, "bilinear")
    return (out, cache) if want_cache else out


def _conv_flops(c_in: int, c_out: int, hw: int) -> int:
    # 2 FLOPs per MAC plus one add per output element for the bias
    return 2 * c_in * c_out * hw + c_out * hw


def count_flops(cfg: ModelConfig, h: int, w: int) -> int:
    """FLOPs of one forward pass on an h x w LR input (1 MAC = 2 FLOPs).

    Spatial shift and pixel shuffle cost 0; ReLU, residual adds,
    sigmoids, and resampling count one FLOP per element produced.
    """
    d, s = cfg.dim, cfg.scale
    hw = h * w
    hw_hr = hw * s * s
    total = _conv_flops(3, d, hw)
    per_block = 2 * _conv_flops(d, d, hw) + hw * d + hw * d  # convs + relu + add
    if cfg.attention == "CA":
        r = d // CA_REDUCTION
        per_block += hw * d + 2 * (2 * d * r) + r + d + hw * d  # pool, fcs, gate
    elif cfg.attention == "SPA":
        per_block += 2 * hw * d + _conv_flops(2, 1, hw) + hw + hw * d
    elif cfg.attention == "PA":
        per_block += _conv_flops(d, d, hw) + hw * d + hw * d
    total += cfg.blocks * per_block
    if cfg.recon == "PixelShuffle":
        total += _conv_flops(d, d, hw) + hw * d
        total += _conv_flops(d, 3 * s * s, hw)
        total += _conv_flops(3, 3, hw_hr)
    elif cfg.recon in ("Nearest", "Bilinear"):
        total += d * hw_hr  # resize
        total += _conv_flops(d, d, hw_hr) + hw_hr * d
        total += _conv_flops(d, 3, hw_hr)
    else:  # TConv
        total += 2 * d * 3 * s * s * hw + 3 * hw_hr
        total += _conv_flops(3, 3, hw_hr)
    total += 3 * hw_hr + 3 * hw_hr  # bilinear skip + final add
    return total
