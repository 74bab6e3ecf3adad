"""Image file I/O: binary PGM (P5) plus optional grayscale/color PNG.

Pixels live as floats in memory; on save they are clipped to [0, 255] and
rounded half away from zero. Label maps ride the same formats with class
indices as pixel values and 255 marking an unlabeled/uncertain pixel.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError
from .image import as_image

UNLABELED_BYTE = 255

# Rendering palette, class-index order: water, settlements, sand, vegetation.
CLASS_PALETTE = (
    (0x1F, 0x77, 0xB4),
    (0xD6, 0x27, 0x28),
    (0xE8, 0xC5, 0x47),
    (0x2C, 0xA0, 0x2C),
)


def quantize_to_bytes(img) -> np.ndarray:
    """Clip to [0, 255] and round half away from zero to uint8."""
    image = as_image(img)
    clipped = np.clip(image, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


def _write_pgm(path: Path, pixels: np.ndarray) -> None:
    height, width = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise ParameterError("truncated PGM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ParameterError("truncated PGM comment")
            pos = nl + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace() and data[end : end + 1] != b"#":
                end += 1
            token = data[pos:end]
            if not token.isdigit():
                raise ParameterError(f"bad PGM header token {token!r}")
            tokens.append(int(token))
            pos = end
    return tokens, pos


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise ParameterError(f"{path}: not a binary PGM (P5) file")
    (width, height, maxval), pos = _read_pgm_tokens(data[2:], 3)
    pos += 2
    if maxval <= 0 or maxval > 255:
        raise ParameterError(f"{path}: unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ParameterError(f"{path}: PGM raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).astype(np.float64)


def save_image(path, img) -> None:
    """Write a grayscale image as binary PGM or (by extension) PNG."""
    target = Path(path)
    pixels = quantize_to_bytes(img)
    if target.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(pixels, mode="L").save(target, format="PNG")
    else:
        _write_pgm(target, pixels)


def load_image(path) -> np.ndarray:
    """Read a grayscale PGM or PNG image as a float64 array."""
    source = Path(path)
    if not source.exists():
        raise ParameterError(f"no such image file: {source}")
    head = source.open("rb").read(8)
    if head.startswith(b"P5"):
        return _read_pgm(source)
    if head.startswith(b"\x89PNG"):
        from PIL import Image

        with Image.open(source) as im:
            return np.asarray(im.convert("L"), dtype=np.float64)
    raise ParameterError(f"{source}: unsupported image format (want binary PGM or PNG)")


def save_label_map(path, labels) -> None:
    """Write class indices as an 8-bit map; -1 entries become 255."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ParameterError(f"label map must be 2-D, got shape {arr.shape}")
    out = arr.astype(np.int64).copy()
    out[out < 0] = UNLABELED_BYTE
    if out.max() > UNLABELED_BYTE:
        raise ParameterError("label values exceed 8-bit range")
    save_image(path, out.astype(np.float64))


def load_label_map(path) -> np.ndarray:
    """Read a label map; byte 255 comes back as -1 (unlabeled)."""
    raw = load_image(path).astype(np.int64)
    raw[raw == UNLABELED_BYTE] = -1
    return raw


def render_label_map(path, labels, class_count: int) -> None:
    """Write a color PNG of a label map using the fixed class palette."""
    from PIL import Image

    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 2:
        raise ParameterError(f"label map must be 2-D, got shape {arr.shape}")
    if class_count < 1 or class_count > len(CLASS_PALETTE):
        raise ParameterError(f"class count must be in [1, {len(CLASS_PALETTE)}]")
    rgb = np.zeros(arr.shape + (3,), dtype=np.uint8)
    for cls in range(class_count):
        rgb[arr == cls] = CLASS_PALETTE[cls]
    Image.fromarray(rgb, mode="RGB").save(Path(path), format="PNG")
