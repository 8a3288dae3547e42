"""Naive-vs-fused latency harness: fixed random input, median timing,
peak transient allocation via the accounting hook."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import alloc
from .errors import ConfigError
from .model import Model, ModelConfig, build_model, forward


@dataclass
class BenchReport:
    config_name: str
    input_h: int
    input_w: int
    impl: str
    iterations: int
    warmup: int
    times_ms: list[float] = field(default_factory=list)
    median_ms: float = 0.0
    p10_ms: float = 0.0
    p90_ms: float = 0.0
    peak_transient_bytes: int = 0

    def csv_rows(self) -> list[str]:
        header = ("config,input,impl,iterations,warmup,"
                  "median_ms,p10_ms,p90_ms,peak_transient_bytes")
        row = (f"{self.config_name},{self.input_h}x{self.input_w},{self.impl},"
               f"{self.iterations},{self.warmup},{self.median_ms:.3f},"
               f"{self.p10_ms:.3f},{self.p90_ms:.3f},{self.peak_transient_bytes}")
        return [header, row]


def bench_latency(config: ModelConfig, size: tuple[int, int], impl: str,
                  iters: int, warmup: int, seed: int = 0,
                  model: Model | None = None) -> BenchReport:
    """Time `iters` forward passes on one fixed random input."""
    if iters < 1 or warmup < 0:
        raise ConfigError("bench needs iters >= 1 and warmup >= 0")
    if model is None:
        model = build_model(config, seed)
    h, w = size
    rng = np.random.default_rng(seed)
    x = rng.random((1, 3, h, w), dtype=np.float32)
    for _ in range(warmup):
        forward(model, x, impl=impl)
    times = []
    peak = 0
    for _ in range(iters):
        with alloc.track() as tracker:
            t0 = time.perf_counter()
            forward(model, x, impl=impl)
            t1 = time.perf_counter()
        times.append((t1 - t0) * 1e3)
        peak = max(peak, tracker.peak)
    name = f"B{config.blocks}D{config.dim}x{config.scale}"
    return BenchReport(
        config_name=name, input_h=h, input_w=w, impl=impl,
        iterations=iters, warmup=warmup, times_ms=times,
        median_ms=float(np.median(times)),
        p10_ms=float(np.percentile(times, 10)),
        p90_ms=float(np.percentile(times, 90)),
        peak_transient_bytes=peak,
    )
