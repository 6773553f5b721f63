"""Write the 256x256 grayscale PGM test corpus from scikit-image sample data.

Dev-only helper (needs scikit-image); the generated files are committed under
tests/data/corpus/ so the test suite does not depend on it.
"""

import sys
from pathlib import Path

import numpy as np
from skimage import color, data, transform

from icrics.imagecore import Image, save_pgm

NAMES = ["astronaut", "camera", "chelsea", "coffee", "moon"]
SIZE = 256


def gray_square(name):
    img = getattr(data, name)()
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3]) * 255.0
    img = img.astype(np.float64)
    h, w = img.shape
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    img = img[top : top + s, left : left + s]
    img = transform.resize(img, (SIZE, SIZE), anti_aliasing=True, preserve_range=True)
    return Image(np.clip(np.floor(img + 0.5), 0, 255))


def main(out="tests/data/corpus"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        save_pgm(gray_square(name), out / f"{name}.pgm")
        print("wrote", out / f"{name}.pgm")


if __name__ == "__main__":
    main(*sys.argv[1:])
