"""Write a random shift vector and orthonormal rotation in the loader's format.

Useful for exercising ``--data-dir`` without official benchmark files:

    python3 scripts/make_shift_rotate.py --dim 10 --seed 1 data/sr_D10.txt
    mlshade-bench run --problem rastrigin@sr_D10.txt:100 --data-dir data --dim 10
"""

import argparse
from pathlib import Path

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path")
    ap.add_argument("--dim", type=int, required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--shift-range", type=float, default=80.0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    q, r = np.linalg.qr(rng.normal(size=(args.dim, args.dim)))
    q *= np.sign(np.diag(r))  # Haar-distributed rotation
    shift = rng.uniform(-args.shift_range, args.shift_range, args.dim)
    path = Path(args.path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(" ".join(repr(float(v)) for v in shift) + "\n")
        for row in q:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
