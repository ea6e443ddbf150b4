#!/usr/bin/env python3
"""Sweep the per-speaker stack depth (zeta) of the cube network.

Thin wrapper over `svkit zeta-sweep`: builds a synthetic corpus once, then
trains/enrolls/evaluates the cube network per depth and prints the
(zeta, EER, AUC) table.
"""

import argparse
import sys
from pathlib import Path

from svkit.cli import main as svkit


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path("runs/zeta_sweep"))
    p.add_argument("--zetas", default="5,10,20")
    p.add_argument("--speakers", type=int, default=12)
    p.add_argument("--dev-speakers", type=int, default=8)
    p.add_argument("--utterances", type=int, default=3)
    p.add_argument("--duration", type=float, default=4.0)
    p.add_argument("--epochs", type=int, default=6)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--max-slices", type=int, default=40)
    return p.parse_args()


def run(cmd):
    rc = svkit(cmd)
    if rc != 0:
        sys.exit(rc)


def main():
    args = parse_args()
    data = args.out / "data"
    run(["synth", "--speakers", str(args.speakers), "--utterances", str(args.utterances),
         "--seed", str(args.seed), "--out", str(data), "--duration", str(args.duration),
         "--dev-speakers", str(args.dev_speakers)])
    run(["zeta-sweep", "--manifest", str(data / "manifest.csv"), "--zetas", args.zetas,
         "--epochs", str(args.epochs), "--lr", "0.003", "--batch", "8",
         "--seed", str(args.seed), "--max-slices", str(args.max_slices),
         "--out-dir", str(args.out)])


if __name__ == "__main__":
    main()
