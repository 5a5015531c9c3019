"""Raster containers and file I/O.

Grayscale images are float64 arrays with values in [0, 1]; binary masks are
bool arrays. Two on-disk formats are supported:

* float rasters: NPY v1.0, little-endian 4-byte IEEE floats, C order, 2D;
* 8-bit images and masks: binary PGM (P5) with maxval 255. Mask files must
  contain only the bytes 0 and 255.

Shapes are reported rows x cols everywhere (row index first); note that the
PGM header itself stores width (cols) before height (rows).
"""

from __future__ import annotations

import io
import os
from typing import Tuple

import numpy as np

from .validation import check_image, check_mask

KINDS = ("gray-f32", "gray-8bit", "mask")


def load_image(path: str | os.PathLike, kind: str = "gray-f32") -> np.ndarray:
    """Load a raster of the given kind.

    gray-f32 reads an NPY float raster, gray-8bit a PGM scaled by 1/255,
    mask a PGM holding only 0/255 bytes. Returns float64 images or a bool
    mask.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown image kind {kind!r}")
    if not os.path.exists(path):
        raise ValueError(f"{path}: file not found")
    if kind == "gray-f32":
        return _load_npy(path)
    data, shape = _read_pgm(path)
    if kind == "mask":
        if not np.isin(data, (0, 255)).all():
            raise ValueError(f"{path}: mask file must contain only 0 and 255")
        return (data == 255).reshape(shape)
    return (data.astype(np.float64) / 255.0).reshape(shape)


def save_image(img: np.ndarray, path: str | os.PathLike, kind: str = "gray-f32") -> None:
    """Write a raster in one of the supported formats."""
    if kind not in KINDS:
        raise ValueError(f"unknown image kind {kind!r}")
    if kind == "gray-f32":
        arr = check_image(img).astype("<f4")
        with open(path, "wb") as fh:
            np.save(fh, arr)
        return
    if kind == "mask":
        mask = check_mask(img)
        data = np.where(mask, 255, 0).astype(np.uint8)
    else:
        arr = check_image(img)
        data = np.rint(arr * 255.0).astype(np.uint8)
    rows, cols = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _load_npy(path) -> np.ndarray:
    try:
        raw = np.load(path, allow_pickle=False)
    except Exception as exc:
        raise ValueError(f"{path}: malformed header ({exc})") from exc
    if raw.ndim != 2:
        raise ValueError(f"{path}: expected a 2D raster, got shape {raw.shape}")
    if raw.dtype != np.dtype("<f4"):
        raise ValueError(f"{path}: expected little-endian float32, got {raw.dtype}")
    arr = raw.astype(np.float64)
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{path}: value out of range [0, 1]")
    return arr


def _read_pgm(path) -> Tuple[np.ndarray, Tuple[int, int]]:
    with open(path, "rb") as fh:
        buf = fh.read()
    stream = io.BytesIO(buf)
    magic = _next_token(stream)
    if magic != b"P5":
        raise ValueError(f"{path}: malformed header (not a P5 PGM)")
    try:
        width = int(_next_token(stream))
        height = int(_next_token(stream))
        maxval = int(_next_token(stream))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header") from exc
    if width < 1 or height < 1:
        raise ValueError(f"{path}: malformed header (bad dimensions)")
    if maxval != 255:
        raise ValueError(f"{path}: malformed header (maxval must be 255)")
    data = stream.read()
    if len(data) < width * height:
        raise ValueError(f"{path}: truncated pixel data")
    pixels = np.frombuffer(data[: width * height], dtype=np.uint8)
    return pixels, (height, width)


def _next_token(stream: io.BytesIO) -> bytes:
    # PGM tokens are separated by whitespace; '#' starts a comment to EOL.
    token = b""
    while True:
        ch = stream.read(1)
        if not ch:
            return token if token else None
        if ch == b"#":
            while ch and ch != b"\n":
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def pad_border(img: np.ndarray, pad_value: float = 1.0) -> np.ndarray:
    """Surround an image with a 1-pixel ring of ``pad_value``."""
    arr = check_image(img)
    if not 0.0 <= pad_value <= 1.0:
        raise ValueError(f"pad_value out of range [0, 1]: {pad_value}")
    return np.pad(arr, 1, mode="constant", constant_values=pad_value)


def crop_border(img: np.ndarray) -> np.ndarray:
    """Drop the outer 1-pixel ring (inverse of :func:`pad_border`)."""
    arr = np.asarray(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"image too small to crop: shape {arr.shape}")
    return arr[1:-1, 1:-1].copy()


def binarize(img: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold a grayscale image; a pixel is foreground iff value >= threshold."""
    arr = check_image(img)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1): {threshold}")
    return arr >= threshold
