"""Desk-scale training: explicit reverse-mode gradients, L1 loss, Adam,
and the random-crop / flip-rotate / bicubic-downscale patch pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError
from .model import Model, forward
from .shiftconv import preset_steps, spatial_shift
from .tensorops import pixel_unshuffle, resize, resize_adjoint

Gradients = dict


@dataclass(frozen=True)
class TrainConfig:
    """LR patches are `patch` pixels square; HR patches are patch*scale."""

    iterations: int
    patch: int = 64
    batch: int = 32
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    # halve the learning rate every N iterations; 0 disables
    lr_halve_every: int = 0

    def __post_init__(self):
        if self.iterations < 0 or self.patch < 1 or self.batch < 1 or self.lr <= 0:
            raise ConfigError("training hyper-parameters must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("Adam betas must lie in (0, 1)")


def l1_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean absolute error and its gradient w.r.t. pred (sign(0) := 0)."""
    if pred.shape != target.shape:
        raise ShapeError(f"l1_loss shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.abs(diff).mean())
    grad = (np.sign(diff) / diff.size).astype(pred.dtype)
    return loss, grad


def _conv_backward(grads: Gradients, weights: dict, name: str, x: np.ndarray,
                   dy: np.ndarray, need_dx: bool = True, has_bias: bool = True):
    """conv1x1 adjoint: dW = dY X^T (summed over batch), dX = W^T dY."""
    n, c_in = x.shape[0], x.shape[1]
    c_out = dy.shape[1]
    hw = x.shape[2] * x.shape[3]
    xm = x.reshape(n, c_in, hw)
    dym = dy.reshape(n, c_out, hw)
    grads[name + ".weight"] += np.matmul(dym, xm.transpose(0, 2, 1)).sum(axis=0)
    if has_bias:
        grads[name + ".bias"] += dy.sum(axis=(0, 2, 3))
    if not need_dx:
        return None
    w = weights[name + ".weight"]
    dx = np.matmul(w.T, dym).reshape(x.shape)
    return dx


def _sc_backward(grads: Gradients, weights: dict, name: str, x: np.ndarray,
                 dy: np.ndarray, steps, need_dx: bool = True):
    """SC layer adjoint: conv backward on the shifted input, then the
    shift adjoint (all steps negated) on the input gradient."""
    shifted = spatial_shift(x, steps)
    dshift = _conv_backward(grads, weights, name, shifted, dy, need_dx=need_dx)
    if not need_dx:
        return None
    return spatial_shift(dshift, steps.negated())


def _attention_backward(grads: Gradients, weights: dict, prefix: str, kind: str,
                        ac: dict, dout: np.ndarray) -> np.ndarray:
    f = ac["in"]
    if kind == "CA":
        w1 = weights[prefix + ".fc1.weight"]
        w2 = weights[prefix + ".fc2.weight"]
        a = ac["a"]
        df = dout * a[:, :, None, None]
        da = (dout * f).sum(axis=(2, 3))
        dz = da * a * (1.0 - a)
        grads[prefix + ".fc2.weight"] += dz.T @ ac["r"]
        grads[prefix + ".fc2.bias"] += dz.sum(axis=0)
        dr = dz @ w2
        dh1 = dr * (ac["h1"] > 0)
        grads[prefix + ".fc1.weight"] += dh1.T @ ac["pool"]
        grads[prefix + ".fc1.bias"] += dh1.sum(axis=0)
        dpool = dh1 @ w1
        hw = f.shape[2] * f.shape[3]
        df += dpool[:, :, None, None] / hw
        return df
    if kind == "SPA":
        w = weights[prefix + ".conv.weight"]
        a = ac["a"]
        df = dout * a[:, None]
        da = (dout * f).sum(axis=1)
        dt = da * a * (1.0 - a)
        grads[prefix + ".conv.weight"][0, 0] += (dt * ac["mean"]).sum()
        grads[prefix + ".conv.weight"][0, 1] += (dt * ac["max"]).sum()
        grads[prefix + ".conv.bias"][0] += dt.sum()
        df += (w[0, 0] * dt)[:, None] / f.shape[1]
        # max routes its gradient to the argmax channel only
        dmax = np.zeros_like(f)
        np.put_along_axis(dmax, ac["argmax"][:, None], (w[0, 1] * dt)[:, None], axis=1)
        df += dmax
        return df
    # PA
    a = ac["a"]
    df = dout * a
    dz = dout * f * a * (1.0 - a)
    df += _conv_backward(grads, weights, prefix + ".conv", f, dz)
    return df


def backward(model: Model, cache: dict, dout: np.ndarray) -> Gradients:
    """Exact reverse-mode gradients for a cached forward pass."""
    if not cache or "recon" not in cache:
        raise ConfigError("activation cache missing; run forward(want_cache=True)")
    cfg = model.config
    weights = model.weights
    steps = preset_steps(cfg.preset)
    s = cfg.scale
    grads: Gradients = {k: np.zeros_like(v) for k, v in weights.items()}

    # skip path is parameter-free, so the recon branch sees dout directly
    rc = cache["recon"]
    if cfg.recon == "PixelShuffle":
        dps = _conv_backward(grads, weights, "recon.out", rc["ps"], dout)
        dup = pixel_unshuffle(dps, s)
        dr = _conv_backward(grads, weights, "recon.up", rc["relu"], dup)
        dt = dr * (rc["sc"] > 0)
        dcur = _sc_backward(grads, weights, "recon.sc", rc["in"], dt, steps)
    elif cfg.recon in ("Nearest", "Bilinear"):
        dr = _conv_backward(grads, weights, "recon.out", rc["relu"], dout)
        dt = dr * (rc["sc"] > 0)
        dresized = _sc_backward(grads, weights, "recon.sc", rc["resized"], dt, steps)
        in_h, in_w = rc["in"].shape[2], rc["in"].shape[3]
        dcur = resize_adjoint(dresized, in_h, in_w, cfg.recon.lower())
    else:  # TConv
        dps = _conv_backward(grads, weights, "recon.out", rc["ps"], dout)
        grads["recon.tconv.bias"] += dps.sum(axis=(0, 2, 3))
        dup = pixel_unshuffle(dps, s)
        dcur = _conv_backward(grads, weights, "recon.tconv", rc["in"], dup,
                              has_bias=False)

    for i in range(cfg.blocks - 1, -1, -1):
        bc = cache["blocks"][i]
        dbranch = dcur
        if cfg.attention != "None":
            dbranch = _attention_backward(
                grads, weights, f"block{i}.att", cfg.attention, bc["att"], dbranch)
        dr = _conv_backward(grads, weights, f"block{i}.conv2", bc["relu"], dbranch)
        dt = dr * (bc["sc"] > 0)
        dx = _sc_backward(grads, weights, f"block{i}.conv1", bc["in"], dt, steps)
        dcur = dcur + dx

    _conv_backward(grads, weights, "head", cache["input"], dcur, need_dx=False)
    return grads


def adam_init(weights: dict) -> dict:
    return {
        "m": {k: np.zeros_like(v) for k, v in weights.items()},
        "v": {k: np.zeros_like(v) for k, v in weights.items()},
    }


def adam_step(weights: dict, grads: Gradients, state: dict, t: int,
              cfg: TrainConfig, lr: float | None = None) -> None:
    """Bias-corrected Adam update, in place. t is 1-based."""
    step_lr = cfg.lr if lr is None else lr
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for name, w in weights.items():
        g = grads[name]
        m = state["m"][name]
        v = state["v"][name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        w -= (step_lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)).astype(w.dtype)


def make_training_pair(hr_image: np.ndarray, scale: int, patch: int,
                       rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random scale-aligned HR crop, flip/rot90 augmentation, bicubic LR."""
    if hr_image.ndim != 3 or hr_image.shape[0] != 3:
        raise ShapeError(f"HR image must be (3, h, w), got {hr_image.shape}")
    _, h, w = hr_image.shape
    hp = patch * scale
    if h < hp or w < hp:
        raise ShapeError(f"image {h}x{w} smaller than HR patch {hp}")
    y0 = int(rng.integers(0, (h - hp) // scale + 1)) * scale
    x0 = int(rng.integers(0, (w - hp) // scale + 1)) * scale
    crop = hr_image[:, y0:y0 + hp, x0:x0 + hp]
    if rng.integers(2):
        crop = crop[:, :, ::-1]
    crop = np.rot90(crop, int(rng.integers(4)), axes=(1, 2))
    crop = np.ascontiguousarray(crop)
    lr_patch = resize(crop[None], patch, patch, "bicubic")[0]
    lr_patch = np.clip(lr_patch, 0.0, 1.0)
    return lr_patch, crop


def train(model: Model, dataset: list[np.ndarray],
          cfg: TrainConfig) -> tuple[Model, list[float]]:
    """Run the sample -> forward -> L1 -> backward -> Adam loop.

    Returns a new Model (the input is untouched) and the per-iteration
    loss history.  Fully deterministic given (seed, data, config).
    """
    if not dataset:
        raise ConfigError("training dataset is empty")
    weights = {k: v.copy() for k, v in model.weights.items()}
    trained = Model(model.config, weights)
    scale = model.config.scale
    rng = np.random.default_rng(cfg.seed)
    state = adam_init(weights)
    history: list[float] = []
    for t in range(1, cfg.iterations + 1):
        idx = rng.integers(0, len(dataset), size=cfg.batch)
        pairs = [make_training_pair(dataset[i], scale, cfg.patch, rng) for i in idx]
        lr_batch = np.stack([p[0] for p in pairs])
        hr_batch = np.stack([p[1] for p in pairs])
        out, cache = forward(trained, lr_batch, want_cache=True)
        loss, dout = l1_loss(out, hr_batch)
        grads = backward(trained, cache, dout)
        step_lr = cfg.lr
        if cfg.lr_halve_every:
            step_lr = cfg.lr * 0.5 ** (t // cfg.lr_halve_every)
        adam_step(weights, grads, state, t, cfg, lr=step_lr)
        history.append(loss)
    return trained, history
