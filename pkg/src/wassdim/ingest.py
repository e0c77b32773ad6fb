"""MNIST loading from IDX files (plain or gzip-compressed)."""
import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "IDXFormatError",
    "LabeledCloud",
    "encode_idx_images",
    "encode_idx_labels",
    "filter_by_digit",
    "load_idx_images",
    "load_idx_labels",
    "load_mnist",
    "MNIST_FILES",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "t10k": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


class IDXFormatError(ValueError):
    """Raised for a wrong magic number or a truncated IDX payload."""


def _read_bytes(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _header(raw, magic, n_dims, path):
    size = 4 * (n_dims + 1)
    if len(raw) < size:
        raise IDXFormatError(f"{path}: file too short for an IDX header ({len(raw)} bytes)")
    values = struct.unpack(f">{n_dims + 1}I", raw[:size])
    if values[0] != magic:
        raise IDXFormatError(f"{path}: magic number 0x{values[0]:08x}, expected 0x{magic:08x}")
    return values[1:], raw[size:]


def load_idx_images(path):
    """Read an IDX image file into an ``(n, rows*cols)`` array scaled to [0, 1]."""
    (n, rows, cols), payload = _header(_read_bytes(path), IMAGE_MAGIC, 3, path)
    expected = n * rows * cols
    if len(payload) < expected:
        raise IDXFormatError(f"{path}: payload has {len(payload)} bytes, header promises {expected}")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=expected)
    return pixels.reshape(n, rows * cols).astype(np.float64) / 255.0


def load_idx_labels(path):
    (n,), payload = _header(_read_bytes(path), LABEL_MAGIC, 1, path)
    if len(payload) < n:
        raise IDXFormatError(f"{path}: payload has {len(payload)} bytes, header promises {n}")
    return np.frombuffer(payload, dtype=np.uint8, count=n).astype(np.int64)


def encode_idx_images(images, rows, cols):
    """Encode uint8 images (n, rows*cols) as IDX bytes. Mostly useful for fixtures."""
    images = np.asarray(images, dtype=np.uint8).reshape(-1, rows * cols)
    return struct.pack(">4I", IMAGE_MAGIC, images.shape[0], rows, cols) + images.tobytes()


def encode_idx_labels(labels):
    labels = np.asarray(labels, dtype=np.uint8).ravel()
    return struct.pack(">2I", LABEL_MAGIC, labels.size) + labels.tobytes()


@dataclass(frozen=True)
class LabeledCloud:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.points.shape[0]} points but {self.labels.shape[0]} labels"
            )


def _find(directory, name):
    for candidate in (name, name + ".gz", name.replace("-idx", ".idx")):
        path = os.path.join(directory, candidate)
        if os.path.exists(path):
            return path
    raise FileNotFoundError(f"no {name}[.gz] in {directory}")


def load_mnist(directory, split="train"):
    """Load one MNIST split from a directory holding the standard file names."""
    if split not in MNIST_FILES:
        raise ValueError(f"split must be one of {sorted(MNIST_FILES)}, got {split!r}")
    image_name, label_name = MNIST_FILES[split]
    images = load_idx_images(_find(directory, image_name))
    labels = load_idx_labels(_find(directory, label_name))
    if images.shape[0] != labels.shape[0]:
        raise IDXFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return LabeledCloud(images, labels)


def filter_by_digit(data, digit):
    """Rows of ``data`` labelled ``digit``, in their original order."""
    if int(digit) != digit or not 0 <= digit <= 9:
        raise ValueError(f"digit must be in 0..9, got {digit!r}")
    return data.points[data.labels == digit]
