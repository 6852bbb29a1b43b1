"""Open-ended exponent drop for power weights: formula value vs. verified value."""
import argparse
from dataclasses import dataclass

from hardyweights import TruncationPolicy, WeightSequence, openended_epsilon
from hardyweights.errors import NotMember


@dataclass
class EpsConfig:
    beta: float = 0.0
    p: float = 2.0
    horizon: int = 10 ** 5


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("alphas", nargs="*", type=float, default=[-0.5, 0.0, 0.5, 0.9, 0.99])
    ap.add_argument("--beta", type=float, default=EpsConfig.beta)
    ap.add_argument("--p", type=float, default=EpsConfig.p)
    ap.add_argument("--horizon", type=int, default=EpsConfig.horizon)
    ns = ap.parse_args(argv)
    cfg = EpsConfig(ns.beta, ns.p, ns.horizon)
    pol = TruncationPolicy(N=cfg.horizon)
    print(f"{'alpha':>7} {'c':>10} {'eps_formula':>12} {'eps_verified':>12}")
    for alpha in ns.alphas:
        try:
            r = openended_epsilon(WeightSequence.power(alpha), cfg.beta, cfg.p, pol)
        except NotMember:
            print(f"{alpha:7.3f} {'not a member':>36}")
            continue
        print(f"{alpha:7.3f} {r.c_used:10.4g} {r.eps_formula:12.5g} {r.eps_verified:12.5g}")


if __name__ == "__main__":
    main()
