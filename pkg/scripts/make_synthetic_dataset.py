"""Write a synthetic human dataset (CSV) in the schema the harness expects.

    python scripts/make_synthetic_dataset.py out.csv --n 85 --seed 0
"""

import argparse
from pathlib import Path

from silicon.study import builtin_scales, write_human_dataset
from silicon.synthetic import make_participants


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("path", type=Path)
    ap.add_argument("--n", type=int, default=85)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--coupling", type=float, default=0.3)
    args = ap.parse_args()
    records = make_participants(args.n, args.seed, args.coupling)
    args.path.parent.mkdir(parents=True, exist_ok=True)
    write_human_dataset(args.path, records, builtin_scales())
    print(f"wrote {len(records)} participants to {args.path}")


if __name__ == "__main__":
    main()
