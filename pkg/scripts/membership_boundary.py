"""Scan QB_{beta,p} membership of power weights k^alpha across alpha.

Prints one row per alpha: verdict, constant bracket and witness index.
The boundary sits at alpha = p - 1 independently of beta.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from hardyweights import TruncationPolicy, WeightSequence, qb_constant


@dataclass
class ScanConfig:
    beta: float = 0.0
    p: float = 2.0
    alpha_min: float = -0.9
    alpha_max: float = 2.0
    steps: int = 30
    horizon: int = 10 ** 5


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(ScanConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = ScanConfig(**vars(ap.parse_args(argv)))
    pol = TruncationPolicy(N=cfg.horizon)
    print(f"# beta={cfg.beta} p={cfg.p} horizon={cfg.horizon}; boundary alpha = {cfg.p - 1:g}")
    print(f"{'alpha':>8} {'verdict':>18} {'lo':>12} {'hi':>12} {'witness':>8}")
    for alpha in np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.steps):
        est = qb_constant(WeightSequence.power(float(alpha)), cfg.beta, cfg.p, pol)
        print(f"{alpha:8.3f} {est.verdict.value:>18} {est.bracket.lo:12.6g} "
              f"{est.bracket.hi:12.6g} {est.witness_n:8d}")


if __name__ == "__main__":
    main()
