#!/usr/bin/env python3
"""End-to-end demo: build a synthetic corpus and run all four stages."""

import argparse
import subprocess
import sys
import tempfile
from pathlib import Path

from valimetrics.demo import build_pair_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="working directory (default: temp)")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    work = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="valimetrics_demo_"))
    corpus = work / "corpus"
    build_pair_corpus(corpus, n=args.n, seed=args.seed)
    cmd = [
        sys.executable, "-m", "valimetrics.cli", "run",
        "--ref", str(corpus / "ref"),
        "--mod", str(corpus / "mod"),
        "--modification", "jpeg:mixed",
        "--ref-pred", str(corpus / "ref_pred.json"),
        "--mod-pred", str(corpus / "mod_pred.json"),
        "--ref-masks", str(corpus / "ref_masks"),
        "--mod-masks", str(corpus / "mod_masks"),
        "--out-dir", str(work / "out"),
        "--jobs", str(args.jobs),
    ]
    code = subprocess.call(cmd)
    print(f"artifacts in {work / 'out'}")
    sys.exit(code)


if __name__ == "__main__":
    main()
