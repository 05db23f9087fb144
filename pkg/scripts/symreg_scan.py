"""Convergence of cancellation networks for several activation stacks."""
import argparse

from ratc1.harness import get_target, write_csv
from ratc1.symreg import build_cancellation_net, convergence_scan

STACKS = ("", "exp1", "atan2", "exp1,atan2")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fn", default="sin2pi")
    ap.add_argument("--schedule", default="4,8,16,32")
    ap.add_argument("--epsilon", type=float, default=1.5)
    ap.add_argument("--out", default="symreg_scan.csv")
    args = ap.parse_args()
    f = get_target(args.fn)
    schedule = [int(t) for t in args.schedule.split(",")]
    rows = []
    for stack in STACKS:
        acts = [a for a in stack.split(",") if a]
        scan = convergence_scan(
            lambda N: build_cancellation_net(f.sampler, acts, N, epsilon=args.epsilon),
            schedule, f)
        for e in scan:
            worst = max(e.cancel_errors, default=0.0)
            rows.append([stack or "none", e.N, e.c0_error, e.c1_error, worst])
        print(f"{stack or 'none':12s} C1 " + " ".join(f"{e.c1_error:.2e}" for e in scan))
    write_csv(args.out, ["activations", "N", "c0_err", "c1_err", "max_cancel_err"], rows)


if __name__ == "__main__":
    main()
