#!/usr/bin/env python3
"""Generate a synthetic demo corpus (images, JPEG mods, predictions, masks)."""

import argparse
import json

from valimetrics.demo import DEFAULT_QUALITIES, build_pair_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--n", type=int, default=100, help="number of pairs")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--qualities", default=",".join(str(q) for q in DEFAULT_QUALITIES),
                    help="comma-separated JPEG qualities cycled over the corpus")
    args = ap.parse_args()
    qualities = tuple(int(q) for q in args.qualities.split(","))
    summary = build_pair_corpus(args.out, n=args.n, seed=args.seed, qualities=qualities)
    print(json.dumps({k: summary[k] for k in ("n", "seed", "qualities")}))


if __name__ == "__main__":
    main()
