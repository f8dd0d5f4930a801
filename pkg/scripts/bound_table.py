"""Tabulate gamma_lower, gamma_thm1 and gamma_upper over random trees."""

from __future__ import annotations

import argparse
import time

from dmac.bounds import compute_bounds
from dmac.dynamics import build_network
from dmac.graph import generate_tree


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--b", type=float, default=0.1)
    args = ap.parse_args()

    print(f"{'seed':>4} {'a_lower':>8} {'a_bar':>8} {'lower':>9} {'thm1':>9} {'upper':>9} {'ok':>3} {'sec':>6}")
    ordered = 0
    for s in range(args.seeds):
        net = build_network(generate_tree(args.n, s), args.b, 2, seed=s, true_index=1)
        t0 = time.perf_counter()
        bnd = compute_bounds(net)
        dt = time.perf_counter() - t0
        ok = bnd.gamma_lower < bnd.gamma_upper
        ordered += ok
        print(f"{s:>4} {net.a_lower:8.5f} {net.a_bar:8.5f} {bnd.gamma_lower:9.4f} "
              f"{bnd.gamma_thm1:9.4f} {bnd.gamma_upper:9.4f} {'y' if ok else 'n':>3} {dt:6.2f}")
    print(f"lower < upper on {ordered}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
