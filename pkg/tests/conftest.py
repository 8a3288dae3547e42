"""Shared fixtures and numerical helpers for the test suite."""
from __future__ import annotations

import numpy as np
import pytest

import shiftsr as s


def synth_texture(seed: int, base: int = 48, size: int = 160) -> np.ndarray:
    """Band-limited random texture: low-res noise bicubic-upscaled."""
    rng = np.random.default_rng(seed)
    low = rng.random((1, 3, base, base), dtype=np.float32)
    img = s.resize(low, size, size, "bicubic")[0]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def model_as_f64(model: s.Model) -> s.Model:
    return s.Model(model.config,
                   {k: v.astype(np.float64) for k, v in model.weights.items()})


def smooth_probe_loss(model: s.Model, x: np.ndarray,
                      u: np.ndarray) -> tuple[float, dict]:
    """<u, forward(x)>: a loss that is smooth in the weights wherever no
    ReLU input sits exactly at a kink, so central differences are valid."""
    out, cache = s.forward(model, x, want_cache=True)
    return float((u * out).sum()), cache


def relu_masks(cache: dict) -> list[np.ndarray]:
    masks = [bc["sc"] > 0 for bc in cache["blocks"]]
    if "sc" in cache["recon"]:
        masks.append(cache["recon"]["sc"] > 0)
    return masks


def fd_gradcheck(model: s.Model, x: np.ndarray, u: np.ndarray,
                 eps: float = 1e-4) -> tuple[float, int]:
    """Central-difference check of backward() against <u, forward(x)>.

    Returns (max relative error, number of parameters skipped because the
    +/-eps perturbation flips a ReLU mask, which invalidates the finite
    difference at that coordinate).
    """
    loss, cache = smooth_probe_loss(model, x, u)
    grads = s.backward(model, cache, u.astype(np.float64))
    worst = 0.0
    skipped = 0
    for name, w in model.weights.items():
        flat = w.reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lp, cp = smooth_probe_loss(model, x, u)
            flat[i] = orig - eps
            lm, cm = smooth_probe_loss(model, x, u)
            flat[i] = orig
            if any((a != b).any() for a, b in zip(relu_masks(cp), relu_masks(cm))):
                skipped += 1
                continue
            fd = (lp - lm) / (2.0 * eps)
            ana = gflat[i]
            rel = abs(ana - fd) / max(abs(ana), abs(fd), 1e-6)
            worst = max(worst, rel)
    return worst, skipped


def fd_directional_check(model: s.Model, x: np.ndarray, u: np.ndarray,
                         seed: int, eps: float = 1e-5) -> float:
    """Directional-derivative variant: perturb all weights along one
    random direction, compare against <grad, direction>.

    A central difference is only valid while no ReLU input changes sign
    between the two evaluation points, so eps is shrunk until the masks
    agree.
    """
    rng = np.random.default_rng(seed)
    direction = {k: rng.standard_normal(v.shape) for k, v in model.weights.items()}
    _, cache = smooth_probe_loss(model, x, u)
    grads = s.backward(model, cache, u.astype(np.float64))
    analytic = sum(float((grads[k] * direction[k]).sum()) for k in grads)

    def shifted(sign: float, step: float) -> s.Model:
        return s.Model(model.config,
                       {k: v + sign * step * direction[k]
                        for k, v in model.weights.items()})

    for _ in range(6):
        lp, cp = smooth_probe_loss(shifted(+1.0, eps), x, u)
        lm, cm = smooth_probe_loss(shifted(-1.0, eps), x, u)
        if all((a == b).all() for a, b in zip(relu_masks(cp), relu_masks(cm))):
            break
        eps /= 10.0
    fd = (lp - lm) / (2.0 * eps)
    return abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-6)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


# Acceptance-criterion results, echoed in the terminal summary so the
# per-criterion lines are visible even with output capture on.
_criterion_lines: list[str] = []


def record_criterion(line: str) -> None:
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
