"""8-bit RGB image decode/encode: PNG (via Pillow) and binary PPM (P6)."""
from __future__ import annotations

import os

import numpy as np

from .errors import ImageFormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _from_bytes(raw: np.ndarray, h: int, w: int) -> np.ndarray:
    arr = raw.reshape(h, w, 3).transpose(2, 0, 1)
    return np.ascontiguousarray(arr, dtype=np.float32) / 255.0


def _load_ppm(data: bytes, path: str) -> np.ndarray:
    # P6 header: magic, width, height, maxval; '#' comments allowed
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PPM header")
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"{path}: only maxval 255 PPM supported, got {maxval}")
    need = w * h * 3
    pixels = data[pos:pos + need]
    if len(pixels) < need:
        raise ImageFormatError(f"{path}: truncated PPM payload")
    return _from_bytes(np.frombuffer(pixels, dtype=np.uint8), h, w)


def load_image(path: str) -> np.ndarray:
    """Decode an 8-bit RGB PNG or P6 PPM into a (3, h, w) [0,1] tensor."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
            rest = fh.read()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if head.startswith(b"P6"):
        return _load_ppm(head + rest, path)
    if head == _PNG_SIGNATURE:
        from PIL import Image

        try:
            with Image.open(path) as im:
                if im.mode != "RGB":
                    raise ImageFormatError(f"{path}: not 8-bit RGB (mode {im.mode})")
                raw = np.asarray(im, dtype=np.uint8)
        except ImageFormatError:
            raise
        except Exception as exc:
            raise ImageFormatError(f"{path}: broken PNG ({exc})") from exc
        return _from_bytes(raw.reshape(-1), raw.shape[0], raw.shape[1])
    raise ImageFormatError(f"{path}: unsupported image format")


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Clamp to [0,1] and quantize round-half-up to 8 bits."""
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img: np.ndarray, path: str) -> None:
    """Encode a (3, h, w) tensor as PNG or PPM, chosen by extension."""
    if img.ndim != 3 or img.shape[0] != 3:
        raise ImageFormatError(f"expected (3, h, w) image, got {img.shape}")
    q = to_uint8(img)
    hwc = np.ascontiguousarray(q.transpose(1, 2, 0))
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        header = f"P6\n{img.shape[2]} {img.shape[1]}\n255\n".encode()
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(hwc.tobytes())
    elif ext == ".png":
        from PIL import Image

        Image.fromarray(hwc, mode="RGB").save(path, format="PNG")
    else:
        raise ImageFormatError(f"unsupported output extension {ext!r}")
