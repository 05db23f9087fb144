"""C1 error of least-squares spline fits as N grows, for several targets and orders."""
import argparse

from ratc1.bspline import fit_spline
from ratc1.harness import c1_error, fit_rate, get_target, unit_grid, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fns", default="sin2pi,gauss,runge")
    ap.add_argument("--q-list", default="2,3,4")
    ap.add_argument("--N-list", default="4,8,16,32")
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--out", default="spline_rates.csv")
    args = ap.parse_args()
    Ns = [int(t) for t in args.N_list.split(",")]
    grid = unit_grid(args.d)
    rows = []
    for name in args.fns.split(","):
        f = get_target(name, args.d)
        for q in (int(t) for t in args.q_list.split(",")):
            errs = []
            for N in Ns:
                rep = c1_error(f, fit_spline(f.sampler, q, N, d=args.d), grid)
                rows.append([name, q, N, rep.c0_error, rep.c1_error])
                errs.append(rep.c1_error)
            slope = fit_rate(Ns, errs).slope
            print(f"{name:8s} q={q}  C1 slope {slope:+.2f}  (smooth-target order {-q / args.d:+.1f})")
    write_csv(args.out, ["fn", "q", "N", "c0_err", "c1_err"], rows)


if __name__ == "__main__":
    main()
