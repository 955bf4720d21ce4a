"""Imbalance, its spread and delta alpha across the operating interval (N = 16)."""

import argparse
from pathlib import Path

from fourwell import cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/fig3/sensitivity.csv")
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--analytic-only", action="store_true", help="skip exact evolution")
    args = ap.parse_args()
    argv = ["sensitivity", "--preset", "fig3", "--grid", f"0:1:{args.steps}", "--out", args.out]
    if args.analytic_only:
        cfg = Path(args.out).with_suffix(".ini")
        cfg.parent.mkdir(parents=True, exist_ok=True)
        cfg.write_text("[sensitivity]\nnumeric = no\n")
        argv += ["--config", str(cfg)]
    code = cli.main(argv)
    print(Path(args.out).read_text())
    raise SystemExit(code)


if __name__ == "__main__":
    main()
