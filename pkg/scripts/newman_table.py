"""Sup errors of the Newman approximants of |x| and ReQU, with the sqrt-rate fit."""
import argparse

from ratc1.harness import fit_rate, write_csv
from ratc1.newman import sup_errors

COLS = ["n", "c0_err_abs", "c0_bound", "c0_err_requ", "c1_err_requ"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-list", default="4,9,16,25,36,49,64")
    ap.add_argument("--grid", type=int, default=100_000)
    ap.add_argument("--out", default="newman_table.csv")
    args = ap.parse_args()
    ns = [int(t) for t in args.n_list.split(",")]
    rows = [[sup_errors(n, args.grid)[c] for c in COLS] for n in ns]
    write_csv(args.out, COLS, rows)
    fit = fit_rate(ns, [r[1] for r in rows], mode="sqrt")
    print(f"wrote {args.out}; log err vs sqrt(n) slope {fit.slope:.3f} (r2 {fit.r2:.4f})")


if __name__ == "__main__":
    main()
