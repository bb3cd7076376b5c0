"""Regenerates the bundled fixtures under data/.

The image is a 32x32 RGB scene (sky gradient, a bird-like blob, ground) with
seeded pixel noise so that no superpixel is uniform in colour.
"""
import math
import pathlib

import numpy as np
from PIL import Image

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def scene(size=32, seed=7):
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(float)
    img = np.zeros((size, size, 3))
    img[..., 0] = 90 + 60 * y / size
    img[..., 1] = 140 + 50 * y / size
    img[..., 2] = 220 - 40 * y / size
    ground = y > 24 + 2 * np.sin(x / 4)
    img[ground] = [70, 120, 50]
    body = ((x - 20) / 6) ** 2 + ((y - 14) / 4) ** 2 < 1
    head = ((x - 25) ** 2 + (y - 10) ** 2) < 6
    img[body | head] = [150, 80, 40]
    beak = (x > 26) & (x < 30) & (np.abs(y - 10) < 1)
    img[beak] = [230, 190, 30]
    img += rng.normal(0, 12, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def irregular_labels(size=32):
    # Four angular sectors around an off-centre point, split into an inner
    # disc and an outer ring: 8 irregular superpixels.
    cx, cy = 19.0, 13.0
    labels = np.zeros((size, size), dtype=int)
    for yy in range(size):
        for xx in range(size):
            angle = math.atan2(yy + 0.5 - cy, xx + 0.5 - cx)
            sector = int(((angle + math.pi) / (2 * math.pi)) * 4) % 4
            ring = 0 if math.hypot(xx + 0.5 - cx, yy + 0.5 - cy) < 9 else 1
            labels[yy, xx] = ring * 4 + sector
    return labels


def grid_labels(size=32, rows=2, cols=4):
    labels = np.zeros((size, size), dtype=int)
    for yy in range(size):
        for xx in range(size):
            labels[yy, xx] = (yy * rows // size) * cols + (xx * cols // size)
    return labels


def write_csv(path, labels):
    path.write_text("".join(",".join(str(v) for v in row) + "\n" for row in labels))


def main():
    ROOT.mkdir(exist_ok=True)
    Image.fromarray(scene(), "RGB").save(ROOT / "bird32.png")
    write_csv(ROOT / "grid_2x4.csv", grid_labels())
    write_csv(ROOT / "irregular_8.csv", irregular_labels())
    (ROOT / "review.txt").write_text(
        "A beautiful film. The acting is superb and the score is moving, "
        "but the plot drags and the ending feels rushed.\n")


if __name__ == "__main__":
    main()
