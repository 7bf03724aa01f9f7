#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Convert the KEEL copies of the UCI Magic and Page-blocks data to LibSVM files.

The KEEL files ship inside the ``keel_ds`` wheel on PyPI
(keel_ds/data/balanced/raw/magic.dat, keel_ds/data/imbalanced/raw/page-blocks0.dat).

    python3 tools/prepare_uci.py --magic magic.dat --pageblocks page-blocks0.dat --out data/

Writes <name>.train / <name>.test with a fixed-seed shuffle and the test sizes
1094 (pageblocks) and 3804 (magic).
"""
import argparse
import pathlib
import random

SPECS = {
    # name: (positive label token, test size)
    "magic": ("g", 3804),
    "pageblocks": ("positive", 1094),
}


def read_keel(path):
    rows = []
    for line in pathlib.Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        fields = [f.strip() for f in line.split(",")]
        rows.append(([float(v) for v in fields[:-1]], fields[-1]))
    return rows


def to_libsvm(rows, positive):
    out = []
    for features, label in rows:
        y = "+1" if label == positive else "-1"
        parts = [f"{i + 1}:{v!r}" for i, v in enumerate(features) if v != 0.0]
        out.append(" ".join([y] + parts))
    return "\n".join(out) + "\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--magic", required=True)
    ap.add_argument("--pageblocks", required=True)
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=20150101)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, path in (("magic", args.magic), ("pageblocks", args.pageblocks)):
        positive, n_test = SPECS[name]
        rows = read_keel(path)
        random.Random(args.seed).shuffle(rows)
        test, train = rows[:n_test], rows[n_test:]
        (out / f"{name}.train").write_text(to_libsvm(train, positive))
        (out / f"{name}.test").write_text(to_libsvm(test, positive))
        print(f"{name}: {len(train)} train / {len(test)} test, d={len(rows[0][0])}")


if __name__ == "__main__":
    main()
