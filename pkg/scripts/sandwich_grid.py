"""Lower and upper constants of the generalized Hardy inequality on a grid.

For psi(k) = k^a and power weights v, prints the extremizer lower bound,
the psi-condition bracket and the absorbed upper bound.
"""
import argparse
from dataclasses import dataclass, field

from hardyweights import PsiWeight, TruncationPolicy, WeightSequence, hardy_sandwich


@dataclass
class GridConfig:
    psi_exponents: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    betas: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    ps: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])
    alphas: list = field(default_factory=lambda: [-0.5, 0.0])
    horizon: int = 10 ** 4


def _floats(text):
    return [float(t) for t in text.split(",")]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = GridConfig()
    ap.add_argument("--psi-exponents", type=_floats, default=d.psi_exponents)
    ap.add_argument("--betas", type=_floats, default=d.betas)
    ap.add_argument("--ps", type=_floats, default=d.ps)
    ap.add_argument("--alphas", type=_floats, default=d.alphas)
    ap.add_argument("--horizon", type=int, default=d.horizon)
    cfg = GridConfig(**vars(ap.parse_args(argv)))
    pol = TruncationPolicy(N=cfg.horizon)
    print(f"{'a':>5} {'beta':>5} {'p':>5} {'alpha':>6} {'lower':>10} {'cond_hi':>10} "
          f"{'upper':>12} holds")
    for a in cfg.psi_exponents:
        for beta in cfg.betas:
            for p in cfg.ps:
                for alpha in cfg.alphas:
                    rep = hardy_sandwich(PsiWeight.power(a), WeightSequence.power(alpha),
                                         beta, p, pol)
                    up = rep.upper.absorbed if rep.upper else float("inf")
                    print(f"{a:5.2f} {beta:5.2f} {p:5.2f} {alpha:6.2f} "
                          f"{rep.lower.bracket.lo:10.4g} {rep.condition.bracket.hi:10.4g} "
                          f"{up:12.4g} {rep.holds}")


if __name__ == "__main__":
    main()
