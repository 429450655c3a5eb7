"""Deterministic rendered-digit corpus in MNIST-style IDX layout.

This sandbox-friendly stand-in renders 28x28 grayscale digits with jittered
size, position, rotation, contrast, and pixel noise. It exists so the
classification workload can run end to end where the real MNIST files are
not available; the loader and training pipeline are identical for both.
"""

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .mnist import Dataset, write_idx

SIDE = 28

_font_cache = {}


def _font(size):
    key = round(size * 2) / 2  # quantize so the cache stays small
    if key not in _font_cache:
        _font_cache[key] = ImageFont.load_default(size=key)
    return _font_cache[key]


def render_digit(digit, rng):
    """One 28x28 uint8 glyph with randomized geometry and noise."""
    img = Image.new("L", (SIDE, SIDE), 0)
    draw = ImageDraw.Draw(img)
    size = rng.uniform(16.0, 23.0)
    dx = rng.uniform(-2.5, 2.5)
    dy = rng.uniform(-2.5, 2.5)
    draw.text((SIDE / 2 + dx, SIDE / 2 + dy), str(digit),
              fill=255, font=_font(size), anchor="mm")
    img = img.rotate(rng.uniform(-14.0, 14.0), resample=Image.BILINEAR, fillcolor=0)
    arr = np.asarray(img, dtype=np.float64)
    arr *= rng.uniform(0.65, 1.0)
    arr += rng.normal(0.0, 10.0, arr.shape)
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def make_digit_corpus(n_train, n_test, seed=0):
    """(train, test) Datasets with balanced shuffled labels."""
    rng = np.random.default_rng([seed, 3])
    sets = []
    for n, split in ((n_train, "train"), (n_test, "test")):
        labels = np.arange(n) % 10
        rng.shuffle(labels)
        images = np.empty((n, SIDE * SIDE), dtype=np.float64)
        for i, lab in enumerate(labels):
            images[i] = render_digit(int(lab), rng).ravel() / 255.0
        sets.append(Dataset(images, labels.astype(np.int64), split))
    return tuple(sets)


def write_digit_corpus(outdir, n_train, n_test, seed=0):
    """Render a corpus and write the four standard IDX files."""
    train, test = make_digit_corpus(n_train, n_test, seed)
    paths = {
        "train_images": outdir / "train-images-idx3-ubyte",
        "train_labels": outdir / "train-labels-idx1-ubyte",
        "test_images": outdir / "t10k-images-idx3-ubyte",
        "test_labels": outdir / "t10k-labels-idx1-ubyte",
    }
    write_idx(train, paths["train_images"], paths["train_labels"])
    write_idx(test, paths["test_images"], paths["test_labels"])
    return paths
