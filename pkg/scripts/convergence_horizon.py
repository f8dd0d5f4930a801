"""How long the minimax selections take to settle on the true models.

Runs the minimax controller for a long horizon and reports the first step
after which every node keeps its true model, alongside the fraction of nodes
already correct at a few checkpoints.
"""

from __future__ import annotations

import argparse

import numpy as np

from dmac.disturbances import DisturbanceSpec
from dmac.dynamics import build_network
from dmac.graph import generate_tree
from dmac.simulate import run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--horizon", type=int, default=2000)
    ap.add_argument("--separation", type=float, default=0.2)
    ap.add_argument("--variance", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()

    checkpoints = [c for c in (50, 100, 200, 400, 800, 1600) if c < args.horizon]
    print("seed  settle  " + "  ".join(f"@{c:<5}" for c in checkpoints))
    for s in range(args.seeds):
        net = build_network(generate_tree(args.n, s), 0.1, 2, seed=s, separation=args.separation, true_index=1)
        trace, _ = run(net, "minimax", DisturbanceSpec("gaussian", args.variance, s), args.horizon)
        correct = np.all(trace.selections == net.true_index[None, :], axis=1)
        wrong = np.flatnonzero(~correct)
        settle = 0 if wrong.size == 0 else int(wrong[-1]) + 1
        fracs = [np.mean(trace.selections[c] == net.true_index) for c in checkpoints]
        shown = str(settle) if settle < args.horizon else "never"
        print(f"{s:>4}  {shown:>6}  " + "  ".join(f"{f:6.1%}" for f in fracs))


if __name__ == "__main__":
    main()
