"""Regenerate the bundled INFM letter bitmap (8-bit PGM, white letters)."""

import argparse
from pathlib import Path

import numpy as np

from ghostsim.io import write_pgm

FONT = {
    "I": ["###", ".#.", ".#.", ".#.", "###"],
    "N": ["#..#", "##.#", "#.##", "#..#", "#..#"],
    "F": ["###", "#..", "##.", "#..", "#.."],
    "M": ["#...#", "##.##", "#.#.#", "#...#", "#...#"],
}


def render(text: str, scale: int) -> np.ndarray:
    cols = []
    for i, ch in enumerate(text):
        if i:
            cols.append(np.zeros((5, 1), bool))
        cols.append(np.array([[c == "#" for c in row] for row in FONT[ch]]))
    glyphs = np.hstack(cols)
    return np.kron(glyphs, np.ones((scale, scale), bool))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--text", default="INFM")
    ap.add_argument("--scale", type=int, default=6)
    ap.add_argument(
        "--out",
        default=Path(__file__).resolve().parents[1] / "src/ghostsim/data/infm.pgm",
    )
    args = ap.parse_args()
    img = render(args.text, args.scale).astype(np.uint8) * 255
    write_pgm(args.out, img)
    print(f"wrote {args.out} ({img.shape[1]}x{img.shape[0]})")
