"""Regenerates the benchmark stand-in images (256x256, 8-bit PGM).

cameraman and natural come from scikit-image's bundled CC0 test data;
illustration and mosaic are synthesized with a fixed seed.
"""
import pathlib

import numpy as np
from skimage import color, data, transform

OUT = pathlib.Path(__file__).parent / "images"
SIZE = 256


def write_pgm(path, img):
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def square(img):
    h, w = img.shape
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    sq = img[top:top + s, left:left + s]
    return transform.resize(sq, (SIZE, SIZE), anti_aliasing=True, preserve_range=True)


def illustration():
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(float)
    img = 200.0 - 0.35 * yy  # sky gradient
    sun = (xx - 190) ** 2 + (yy - 60) ** 2 < 28 ** 2
    img[sun] = 245
    hill1 = yy > 150 + 30 * np.sin(xx / 40.0)
    img[hill1] = 90 + 0.2 * (yy[hill1] - 150)
    hill2 = yy > 190 + 15 * np.cos(xx / 25.0 + 1.0)
    img[hill2] = 55
    house = (xx > 50) & (xx < 110) & (yy > 120) & (yy < 185)
    img[house] = 170
    roof = (yy <= 120) & (yy > 85) & (np.abs(xx - 80) < (yy - 85) * 1.0)
    img[roof] = 35
    door = (xx > 72) & (xx < 90) & (yy > 150) & (yy < 185)
    img[door] = 20
    window = (xx > 92) & (xx < 104) & (yy > 132) & (yy < 144)
    img[window] = 230
    return img


def mosaic():
    rng = np.random.default_rng(20240611)
    pts = rng.uniform(0, SIZE, size=(60, 2))
    levels = rng.integers(30, 226, size=60).astype(float)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(float)
    d = (yy[..., None] - pts[:, 0]) ** 2 + (xx[..., None] - pts[:, 1]) ** 2
    order = np.argsort(d, axis=-1)
    nearest = order[..., 0]
    img = levels[nearest]
    d_sorted = np.take_along_axis(d, order[..., :2], axis=-1)
    grout = np.sqrt(d_sorted[..., 1]) - np.sqrt(d_sorted[..., 0]) < 2.0
    img[grout] = 15
    return img


def main():
    OUT.mkdir(exist_ok=True)
    write_pgm(OUT / "cameraman.pgm", square(data.camera().astype(float)))
    natural = color.rgb2gray(data.chelsea()) * 255.0
    write_pgm(OUT / "natural.pgm", square(natural))
    write_pgm(OUT / "illustration.pgm", illustration())
    write_pgm(OUT / "mosaic.pgm", mosaic())


if __name__ == "__main__":
    main()
