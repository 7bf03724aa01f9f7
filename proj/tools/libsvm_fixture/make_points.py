# SPDX-License-Identifier: Apache-2.0
"""Small training sets and probe points for the LibSVM fixture.

Values have three decimals so LibSVM's %.8g feature output is exact.
"""
import random
import sys
from pathlib import Path


def line(label, xs):
    feats = " ".join(f"{i + 1}:{x:.3f}" for i, x in enumerate(xs) if x != 0.0)
    return f"{label} {feats}".rstrip() + "\n"


def main(out):
    out = Path(out)
    rng = random.Random(7)
    binary = []
    for i in range(20):
        label = 1 if i % 2 == 0 else -1
        centre = 0.8 if label == 1 else -0.8
        binary.append((label, [round(rng.gauss(centre, 1.0), 3) for _ in range(3)]))
    (out / "binary.train").write_text("".join(line(l, x) for l, x in binary))

    multi = []
    centres = {1: (1.5, 0.0), 2: (-1.0, 1.2), 3: (-0.5, -1.5)}
    for i in range(24):
        label = (1, 3, 2)[i % 3]
        cx, cy = centres[label]
        multi.append((label, [round(rng.gauss(cx, 0.9), 3), round(rng.gauss(cy, 0.9), 3), round(rng.gauss(0, 0.5), 3)]))
    (out / "multi.train").write_text("".join(line(l, x) for l, x in multi))

    probes = [[round(rng.uniform(-3, 3), 3) for _ in range(3)] for _ in range(40)]
    (out / "probes.txt").write_text("".join(line(0, x) for x in probes))


if __name__ == "__main__":
    main(sys.argv[1])
