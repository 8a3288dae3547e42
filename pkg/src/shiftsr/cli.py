"""Command-line surface: sr, eval, train, count, bench."""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bench import bench_latency
from .checkpoint import read_checkpoint, write_checkpoint
from .errors import CheckpointError, ConfigError, ImageFormatError, ShapeError
from .images import load_image, save_image
from .metrics import psnr, quantized_y, ssim
from .model import (
    ATTENTION_VARIANTS,
    RECON_VARIANTS,
    ModelConfig,
    build_model,
    count_flops,
    count_params,
    forward,
)
from .shiftconv import STEP_PRESETS
from .tensorops import resize
from .trainer import TrainConfig, train


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--preset", choices=STEP_PRESETS, default="Shift8")
    p.add_argument("--recon", choices=RECON_VARIANTS, default="PixelShuffle")
    p.add_argument("--attention", choices=ATTENTION_VARIANTS, default="None")


def _config_from_args(args) -> ModelConfig:
    return ModelConfig(blocks=args.blocks, dim=args.dim, scale=args.scale,
                       preset=args.preset, recon=args.recon,
                       attention=args.attention)


def _list_images(directory: str) -> list[str]:
    names = [n for n in os.listdir(directory)
             if n.lower().endswith((".png", ".ppm"))]
    return sorted(names)


def _cmd_sr(args) -> int:
    model = read_checkpoint(args.model)
    img = load_image(args.input)
    out = forward(model, img[None], impl=args.impl)
    save_image(out[0], args.output)
    return 0


def _cmd_eval(args) -> int:
    model = read_checkpoint(args.model)
    s = model.config.scale
    crop = s if args.crop is None else args.crop
    names = _list_images(args.hr_dir)
    if not names:
        raise ImageFormatError(f"no PNG/PPM images in {args.hr_dir}")
    print("filename,psnr_db,ssim")
    psnrs, ssims = [], []
    for name in names:
        hr = load_image(os.path.join(args.hr_dir, name))
        h = hr.shape[1] // s * s
        w = hr.shape[2] // s * s
        hr = hr[:, :h, :w]
        lr = np.clip(resize(hr[None], h // s, w // s, "bicubic"), 0.0, 1.0)
        sr = forward(model, lr, impl=args.impl)[0]
        p = psnr(quantized_y(sr), quantized_y(hr), border_crop=crop)
        q = ssim(quantized_y(sr), quantized_y(hr), border_crop=crop)
        psnrs.append(p)
        ssims.append(q)
        print(f"{name},{p:.4f},{q:.6f}")
    print(f"mean,{np.mean(psnrs):.4f},{np.mean(ssims):.6f}")
    return 0


def _cmd_train(args) -> int:
    config = _config_from_args(args)
    model = build_model(config, args.seed)
    names = _list_images(args.hr_dir)
    if not names:
        raise ImageFormatError(f"no PNG/PPM images in {args.hr_dir}")
    dataset = [load_image(os.path.join(args.hr_dir, n)) for n in names]
    tcfg = TrainConfig(iterations=args.iters, patch=args.patch, batch=args.batch,
                       lr=args.lr, seed=args.seed,
                       lr_halve_every=args.lr_halve_every)
    trained, history = train(model, dataset, tcfg)
    write_checkpoint(trained, args.out)
    loss_csv = args.loss_csv or args.out + ".loss.csv"
    with open(loss_csv, "w") as fh:
        fh.write("iteration,loss\n")
        for i, loss in enumerate(history, start=1):
            fh.write(f"{i},{loss:.8f}\n")
    print(f"wrote {args.out} and {loss_csv} (final loss "
          f"{history[-1]:.6f})" if history else f"wrote {args.out}")
    return 0


def _cmd_count(args) -> int:
    config = _config_from_args(args)
    h, w = args.flops_hw
    print(f"params: {count_params(config):,}")
    print(f"flops({h}x{w}): {count_flops(config, h, w):,}")
    return 0


def _cmd_bench(args) -> int:
    config = _config_from_args(args)
    report = bench_latency(config, tuple(args.size), args.impl,
                           args.iters, args.warmup, seed=args.seed)
    for line in report.csv_rows():
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftsr",
        description="Super-resolution with fully 1x1-convolution shift networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sr", help="super-resolve one image")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--impl", choices=("naive", "fused"), default="fused")
    p.set_defaults(func=_cmd_sr)

    p = sub.add_parser("eval", help="bicubic-downscale, super-resolve, report "
                                    "Y-channel PSNR/SSIM as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--hr-dir", required=True)
    p.add_argument("--crop", type=int, default=None,
                   help="border crop in pixels (default: model scale)")
    p.add_argument("--impl", choices=("naive", "fused"), default="fused")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("train", help="train a model on a directory of HR images")
    _add_config_flags(p)
    p.add_argument("--hr-dir", required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--patch", type=int, default=64, help="LR patch size")
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr-halve-every", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-csv", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("count", help="print parameter count and FLOPs")
    _add_config_flags(p)
    p.add_argument("--flops-hw", type=int, nargs=2, default=(256, 256),
                   metavar=("H", "W"))
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("bench", help="naive-vs-fused latency harness")
    _add_config_flags(p)
    p.add_argument("--size", type=int, nargs=2, required=True, metavar=("H", "W"))
    p.add_argument("--impl", choices=("naive", "fused"), required=True)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ShapeError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (CheckpointError, ImageFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
