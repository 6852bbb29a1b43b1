"""Compare the exponential-kernel sum with the bounds F(n)/(1-2 eps C) and
2C F(n)/(1-2 eps C) for a member weight; shows where the smaller one fails."""
import argparse

from hardyweights import TruncationPolicy, WeightSequence
from hardyweights.extrapolation import exponential_kernel_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--beta", type=float, default=0.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--horizon", type=int, default=10 ** 5)
    ns = ap.parse_args(argv)
    kc = exponential_kernel_check(WeightSequence.power(ns.alpha), ns.beta, ns.p, ns.eps,
                                  [1, 2, 5, 10, 100, 1000], TruncationPolicy(N=ns.horizon))
    print(f"C = {kc.C:.6g}, eps = {kc.eps}")
    print(f"{'n':>6} {'sum_lo':>12} {'sum_hi':>12} {'F/(1-2eC)':>12} {'2CF/(1-2eC)':>12}")
    for i, n in enumerate(kc.n):
        iv = kc.kernel_sum[i]
        print(f"{n:6d} {iv.lo:12.6g} {iv.hi:12.6g} {kc.bound_stated[i]:12.6g} "
              f"{kc.bound_iterated[i]:12.6g}")


if __name__ == "__main__":
    main()
