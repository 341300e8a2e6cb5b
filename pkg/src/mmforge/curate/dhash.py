"""64-bit difference hashing for near-duplicate image detection.

The image is reduced to an 8-row by 9-column grayscale thumbnail
(half-pixel bilinear, matching numcore) and each bit records whether a
pixel is darker than its right neighbor. Equal hashes flag near-duplicates;
Hamming distance gives a softer similarity.
"""

from __future__ import annotations

import numpy as np

from ..numcore import Tensor, bilinear_resize

_LUMA = np.array([0.299, 0.587, 0.114])


class ImageDecodeError(ValueError):
    """Raised when the input cannot be interpreted as a raster image."""


def to_grayscale(image) -> np.ndarray:
    """Coerce an array-like raster (2D gray or 3D RGB/RGBA) to a 2D float array."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        gray = arr
    elif arr.ndim == 3 and arr.shape[2] in (3, 4):
        gray = arr[:, :, :3] @ _LUMA
    elif arr.ndim == 3 and arr.shape[2] == 1:
        gray = arr[:, :, 0]
    else:
        raise ImageDecodeError(f"cannot interpret array of shape {arr.shape} as an image")
    if gray.size == 0:
        raise ImageDecodeError("empty image")
    if not np.all(np.isfinite(gray)):
        raise ImageDecodeError("image contains non-finite values")
    return gray


def dhash(image) -> int:
    """Row-major packed 64-bit hash; bit (r*8+c) set iff pixel(r,c) < pixel(r,c+1)."""
    gray = to_grayscale(image)
    thumb = bilinear_resize(Tensor(gray[:, :, None]), 8, 9).array[:, :, 0]
    value = 0
    for r in range(8):
        for c in range(8):
            value = (value << 1) | int(thumb[r, c] < thumb[r, c + 1])
    return value


def hamming64(a: int, b: int) -> int:
    return bin((a ^ b) & 0xFFFFFFFFFFFFFFFF).count("1")


def dhash_many(images, workers: int | None = None) -> list[int]:
    """Hash a batch with a bounded worker pool, preserving input order."""
    from concurrent.futures import ThreadPoolExecutor

    images = list(images)
    if len(images) < 2:
        return [dhash(img) for img in images]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(dhash, images))
