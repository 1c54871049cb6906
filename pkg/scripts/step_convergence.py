"""Total-variation distance between step counts S and 2S for each built-in instance,
for both integrator orders. Shows where the default 400 steps suffice."""

import argparse

from qhdkit.discretize import assemble_discretized
from qhdkit.embedding import assemble_embedding
from qhdkit.evolve import EvolveConfig, convergence_check
from qhdkit.instances import BUILTIN_IDS, builtin
from qhdkit.schedule import SmoothLog


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, nargs="+", default=[100, 200, 400, 800, 1600])
    ap.add_argument("--grid", type=int, default=17)
    args = ap.parse_args()
    print(f"{'instance':14s} {'backend':9s} order " + " ".join(f"{s:>9d}" for s in args.steps))
    for iid in BUILTIN_IDS:
        p = builtin(iid).problem
        targets = [("direct", assemble_discretized(p, args.grid))]
        if p.n == 2:
            targets.append(("embedded", assemble_embedding(assemble_discretized(p, 6), "unary")))
        for backend, H in targets:
            for order in (2, 4):
                tvs = [convergence_check(H, SmoothLog(), EvolveConfig(steps=s, backend=backend,
                                                                      order=order)).tv_distance
                       for s in args.steps]
                print(f"{iid:14s} {backend:9s} {order:5d} " + " ".join(f"{tv:9.2e}" for tv in tvs))


if __name__ == "__main__":
    main()
