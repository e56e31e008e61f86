"""Dataset containers, the synthetic two-class image task, and folder loading.

Images are float64 arrays shaped (N, H, W, 1) with values in [0, 1]; labels
are one-hot float64 of shape (N, 2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

SUPPORTED_EXTENSIONS = (".png", ".pgm")
TRAIN_FRACTION = 0.7


class IngestionError(ValueError):
    """Manifest rows that could not be ingested; .rows lists (line, filename, problem)."""

    def __init__(self, message: str, rows: list[tuple[int, str, str]]):
        super().__init__(message)
        self.rows = rows


class UnsupportedImageFormat(ValueError):
    """A manifest row referenced a file type outside PNG / PGM."""


@dataclass
class SplitData:
    """One split: images (N, H, W, 1) in [0, 1] and one-hot labels (N, 2)."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.images.ndim != 4 or self.images.shape[3] != 1:
            raise ValueError(f"images must be (N, H, W, 1), got {self.images.shape}")
        if self.labels.ndim != 2 or self.labels.shape[1] != 2:
            raise ValueError(f"labels must be (N, 2), got {self.labels.shape}")
        if self.images.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )
        if self.images.size and (
            float(self.images.min()) < 0.0 or float(self.images.max()) > 1.0
        ):
            raise ValueError("image values must lie in [0, 1]")
        row_sums = self.labels.sum(axis=1)
        if self.labels.size and not (
            np.all(np.isin(self.labels, (0.0, 1.0))) and np.all(row_sums == 1.0)
        ):
            raise ValueError("labels must be one-hot rows")

    @property
    def n(self) -> int:
        return int(self.images.shape[0])


@dataclass
class Dataset:
    """Train and test splits plus a name for reporting."""

    train: SplitData
    test: SplitData
    name: str = "dataset"


def _one_hot(labels: np.ndarray) -> np.ndarray:
    out = np.zeros((len(labels), 2), dtype=np.float64)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def synth_dataset(
    n_samples: int, seed: int, noise: float = 0.1, image_size: int = 16
) -> Dataset:
    """Two-class striped images: horizontal bands vs vertical bands.

    Bands are 4 pixels wide, alternating 0.75 / 0.25, plus uniform noise in
    [-noise, +noise], clipped back to [0, 1].  Half the samples per class;
    per class, round(0.7 * count) go to train and the rest to test, so the
    split sizes are exact and deterministic.  All randomness comes from one
    seeded Generator.
    """
    if n_samples < 20 or n_samples % 2:
        raise ValueError(f"n_samples must be even and >= 20, got {n_samples}")
    if not (0.0 <= noise <= 0.5):
        raise ValueError(f"noise must lie in [0, 0.5], got {noise}")
    if image_size < 8:
        raise ValueError(f"image_size must be >= 8, got {image_size}")
    rng = np.random.default_rng(seed)
    per_class = n_samples // 2
    bands = np.where((np.arange(image_size) // 4) % 2 == 0, 0.75, 0.25)
    base = {
        0: np.broadcast_to(bands[:, None], (image_size, image_size)),  # horizontal
        1: np.broadcast_to(bands[None, :], (image_size, image_size)),  # vertical
    }
    images: dict[int, np.ndarray] = {}
    for label in (0, 1):
        jitter = rng.uniform(-noise, noise, size=(per_class, image_size, image_size))
        images[label] = np.clip(base[label][None] + jitter, 0.0, 1.0)[..., None]

    n_train_pc = round(TRAIN_FRACTION * per_class)
    splits = {}
    for part, sl in (("train", slice(0, n_train_pc)), ("test", slice(n_train_pc, None))):
        part_images = []
        part_labels = []
        chunk = {label: images[label][sl] for label in (0, 1)}
        for i in range(chunk[0].shape[0]):
            for label in (0, 1):
                part_images.append(chunk[label][i])
                part_labels.append(label)
        splits[part] = SplitData(
            images=np.stack(part_images), labels=_one_hot(np.array(part_labels))
        )
    return Dataset(train=splits["train"], test=splits["test"], name=f"synth{n_samples}")


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel-centered coordinates.

    Interpolation is computed as a + w * (b - a), so a constant image stays
    exactly constant at any output size.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {image.shape}")
    in_h, in_w = image.shape
    ys = np.clip((np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5, 0.0, in_h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    a = image[np.ix_(y0, x0)]
    b = image[np.ix_(y0, x1)]
    c = image[np.ix_(y1, x0)]
    d = image[np.ix_(y1, x1)]
    top = a + wx * (b - a)
    bottom = c + wx * (d - c)
    return top + wy * (bottom - top)


def _decode_image(path: Path) -> np.ndarray:
    """File -> 2-d float64 grayscale in [0, 1]; color collapses by channel mean."""
    with Image.open(path) as img:
        if img.mode in ("I", "I;16", "I;16B"):
            arr = np.asarray(img, dtype=np.float64) / 65535.0
        elif img.mode == "L":
            arr = np.asarray(img, dtype=np.float64) / 255.0
        else:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
            arr = rgb.mean(axis=2) / 255.0
    return np.clip(arr, 0.0, 1.0)


def load_image_folder(
    root, manifest_path, image_size: int = 16
) -> Dataset:
    """Load a labeled image folder described by a manifest CSV.

    The manifest has a header line ``filename,label`` with labels 0 or 1 and
    filenames relative to root.  Only PNG and PGM files are accepted.  Every
    image is decoded to grayscale (channel mean for color), resized to
    image_size x image_size with bilinear resampling, and clipped to [0, 1].
    The split is stratified per class in manifest order: the first
    round(0.7 * class count) rows of each class train, the rest test.
    """
    root = Path(root)
    manifest_path = Path(manifest_path)
    # ingestion itself works at any size; the network builder rejects sizes
    # its pooling cannot halve
    if image_size < 1:
        raise ValueError(f"image_size must be >= 1, got {image_size}")

    entries: list[tuple[int, str, int]] = []
    bad_rows: list[tuple[int, str, str]] = []
    with open(manifest_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["filename", "label"]:
            raise ValueError(
                f"manifest {manifest_path} must start with a 'filename,label' header"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                bad_rows.append((line_no, ",".join(row), "expected two columns"))
                continue
            name = row[0].strip()
            label_text = row[1].strip()
            if label_text not in ("0", "1"):
                bad_rows.append((line_no, name, f"label must be 0 or 1, got {label_text!r}"))
                continue
            entries.append((line_no, name, int(label_text)))
    if bad_rows:
        raise IngestionError(
            f"{len(bad_rows)} malformed manifest rows in {manifest_path}", rows=bad_rows
        )

    unsupported = [
        (line_no, name)
        for line_no, name, _ in entries
        if Path(name).suffix.lower() not in SUPPORTED_EXTENSIONS
    ]
    if unsupported:
        listing = ", ".join(f"line {ln}: {nm}" for ln, nm in unsupported)
        raise UnsupportedImageFormat(
            f"only {SUPPORTED_EXTENSIONS} files are supported; offending rows: {listing}"
        )

    missing = [
        (line_no, name, "file not found")
        for line_no, name, _ in entries
        if not (root / name).is_file()
    ]
    if missing:
        raise IngestionError(
            f"{len(missing)} manifest rows reference missing files under {root}",
            rows=missing,
        )

    by_class: dict[int, list[np.ndarray]] = {0: [], 1: []}
    for _, name, label in entries:
        arr = _decode_image(root / name)
        arr = np.clip(resize_bilinear(arr, image_size, image_size), 0.0, 1.0)
        by_class[label].append(arr[..., None])

    parts = {"train": ([], []), "test": ([], [])}
    for label in (0, 1):
        have = by_class[label]
        n_train = round(TRAIN_FRACTION * len(have))
        for i, arr in enumerate(have):
            part = "train" if i < n_train else "test"
            parts[part][0].append(arr)
            parts[part][1].append(label)
    splits = {}
    for part, (imgs, labels) in parts.items():
        if imgs:
            images = np.stack(imgs)
            onehot = _one_hot(np.array(labels))
        else:
            # an empty manifest (or a class too small to split) is data,
            # not an error; downstream code sees zero-sample splits
            images = np.zeros((0, image_size, image_size, 1))
            onehot = np.zeros((0, 2))
        splits[part] = SplitData(images=images, labels=onehot)
    return Dataset(train=splits["train"], test=splits["test"], name=root.name)
