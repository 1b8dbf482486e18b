"""Regenerates assets/natural/*.png from scikit-image's bundled sample images.

Each image is converted to grayscale and downsampled 4x with anti-aliasing.
Sources (scikit-image data, public domain or CC0): astronaut (NASA),
camera, coffee, chelsea, rocket (NASA).
"""
import pathlib

import numpy as np
from skimage import color, data, io, transform

OUT = pathlib.Path(__file__).resolve().parent.parent / "assets" / "natural"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name in ["astronaut", "camera", "coffee", "chelsea", "rocket"]:
        img = getattr(data, name)()
        if img.ndim == 3:
            img = color.rgb2gray(img)
        else:
            img = img / 255.0
        small = transform.rescale(img, 0.25, anti_aliasing=True)
        io.imsave(OUT / f"{name}.png", np.round(np.clip(small, 0, 1) * 255).astype(np.uint8),
                  check_contrast=False)


if __name__ == "__main__":
    main()
