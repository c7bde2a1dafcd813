#!/usr/bin/env python3
"""Log observed diameters of nonzero loci against the (2k+1)(2^k - 1) bound.

For random instances (rho, gamma_1..gamma_r) this prints the exact maximal
twisted bias next to the eta threshold, whether the quasirandomness
hypothesis holds, and the observed (or certified-upper-bound) diameter.  The
bound is only asserted when the hypothesis holds; everything else is
exploratory output, including cases where the conclusion still holds at a
milder threshold.
"""

import argparse
from fractions import Fraction

import numpy as np

from rankforge.forms import Shape, random_multilinear
from rankforge.varieties import nonzero_conn_check

INSTANCES = [
    # (p, dims, gamma index sets)
    (2, (6, 6), []),
    (2, (8, 8), []),
    (2, (10, 10), []),
    (2, (4, 4), [(1,)]),
    (2, (5, 5), [(1,), (2,)]),
    (2, (3, 3, 3), []),
    (3, (3, 3), []),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--per-config", type=int, default=3)
    args = ap.parse_args()

    print(f"{'shape':>16} {'r':>2} {'max_bias':>12} {'eta':>14} {'hyp':>4} "
          f"{'conn':>5} {'diam':>5} {'exact':>5} {'bound':>5}")
    for p, dims, gamma_sets in INSTANCES:
        sh = Shape(p, dims)
        for t in range(args.per_config):
            rho = random_multilinear(sh, 1, [args.seed, p, len(dims), t])
            gammas = []
            for gi, I in enumerate(gamma_sets):
                sub = sh.sub(I)
                gammas.append((frozenset(I), random_multilinear(sub, 1, [args.seed, p, t, gi])))
            rep = nonzero_conn_check(rho, gammas)
            bound = rep.diameter_bound
            diam = rep.diameter if rep.diameter is not None else -1
            print(f"{str((p, dims)):>16} {len(gammas):>2} "
                  f"{str(rep.max_bias):>12} {str(rep.eta_threshold):>14} "
                  f"{str(rep.hypothesis_satisfied):>4} {str(rep.is_connected):>5} "
                  f"{diam:>5} {str(rep.diameter_exact):>5} {bound:>5}")


if __name__ == "__main__":
    main()
