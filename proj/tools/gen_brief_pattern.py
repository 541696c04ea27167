#!/usr/bin/env python3
"""Regenerates src/brief_pattern.inc, the fixed BRIEF-256 sampling pattern.

Point offsets are drawn from an isotropic Gaussian with variance 31^2/25,
kept inside a radius-15 disk, rounded to integer pixels. A pair is rejected
if its two points coincide under any of the 12 steered (30 degree) copies.
Bump PATTERN_VERSION whenever the output changes.
"""
import math
import random
import sys

PATTERN_VERSION = 1
SEED = 20220301
PAIRS = 256
RADIUS = 15
SIGMA = math.sqrt(31.0 ** 2 / 25.0)


def sample_point(rng):
    while True:
        x = rng.gauss(0.0, SIGMA)
        y = rng.gauss(0.0, SIGMA)
        if x * x + y * y <= RADIUS * RADIUS:
            return int(round(x)), int(round(y))


def rotate(p, k):
    a = k * math.pi / 6.0
    c, s = math.cos(a), math.sin(a)
    return (int(round(p[0] * c - p[1] * s)), int(round(p[0] * s + p[1] * c)))


def main():
    rng = random.Random(SEED)
    pairs = []
    while len(pairs) < PAIRS:
        p, q = sample_point(rng), sample_point(rng)
        if any(rotate(p, k) == rotate(q, k) for k in range(12)):
            continue
        pairs.append(p + q)
    out = sys.stdout
    out.write("// Generated by tools/gen_brief_pattern.py; do not edit.\n")
    out.write(f"// pattern version {PATTERN_VERSION}, seed {SEED}\n")
    for i in range(0, PAIRS, 4):
        out.write("    " + " ".join("{%d, %d, %d, %d}," % t for t in pairs[i:i + 4]) + "\n")


if __name__ == "__main__":
    main()
