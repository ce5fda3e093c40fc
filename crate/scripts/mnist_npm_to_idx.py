#!/usr/bin/env python3
"""Convert the digit dumps of the `mnist` npm package into IDX files.

Usage: mnist_npm_to_idx.py <package/src/digits> <out_dir> [per_class] [classes]

Intensities in the npm dump are byte/255 rounded to three decimals, so the
original bytes are recovered with round(x * 255).
"""
import json
import random
import struct
import sys
from pathlib import Path


def main():
    src = Path(sys.argv[1])
    out = Path(sys.argv[2])
    per_class = int(sys.argv[3]) if len(sys.argv) > 3 else 600
    classes = [int(c) for c in sys.argv[4].split(",")] if len(sys.argv) > 4 else [0, 1]
    samples = []
    for c in classes:
        raw = json.loads((src / f"{c}.json").read_text())["data"]
        n = len(raw) // 784
        for k in range(min(n, per_class)):
            img = bytes(round(v * 255) for v in raw[k * 784:(k + 1) * 784])
            samples.append((img, c))
    random.Random(2017).shuffle(samples)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(samples), 28, 28))
        for img, _ in samples:
            f.write(img)
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 2049, len(samples)))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {len(samples)} samples to {out}")


if __name__ == "__main__":
    main()
