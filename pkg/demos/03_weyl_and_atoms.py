"""The Weyl second moment S_N and what it says about atoms.

S_N averages |joint coefficient|^2 along the scaling orbit n < N; its limit
equals the sum of squared atom masses of the pushforward of <m, f>.  Four
maps, four stories:

  constant      -> one atom of mass 1      -> S_N = 1
  identity      -> no atoms                -> S_N = 1/N
  1/3-composite -> one atom of mass 1/3    -> S_N -> 1/9
  inverse devil -> continuous pushforward  -> S_N -> 0

The sliding-window atom detector confirms the same split directly.
"""

import argparse

import numpy as np

from fibrot import (
    midpoint_grid, weyl_statistic, atom_spectrum,
    Linear, CantorInverseDevil, Tabulated,
)


def composite(q):
    x = (np.arange(q) + 0.5) / q
    return Tabulated(np.where(x < 1 / 3, 1 / np.sqrt(2), x))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    grid = midpoint_grid(8192)
    maps = {
        "constant": Tabulated(np.full(8192, 0.37)),
        "identity": Linear([1.0]),
        "composite": composite(8192),
        "inverse devil": CantorInverseDevil(depth=24),
    }

    reports = {}
    print(f"{'map':<14} {'S_100':>10} {'S_1000':>10} {'S_5000':>10}"
          f" {'max window mass':>17}")
    for name, f in maps.items():
        rep = weyl_statistic(f, [1], 5000, grid)
        atom = atom_spectrum(f, grid, [1], 1e-3, threshold=0.05)
        reports[name] = rep
        picks = {int(n): s for n, s in zip(rep.N_values, rep.S_values)}
        print(f"{name:<14} {picks[128]:>10.5f} {picks[1024]:>10.5f}"
              f" {rep.limit_estimate:>10.5f} {atom.max_window_mass:>17.5f}")

    print("\nlimits: 1, 0, 1/9 = 0.1111, 0  -- matching the atom masses")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, rep in reports.items():
            ax.loglog(rep.N_values, rep.S_values, "o-", label=name, ms=3)
        ax.axhline(1 / 9, color="gray", lw=0.6, ls="--")
        ax.set_xlabel("N")
        ax.set_ylabel("S_N")
        ax.legend()
        fig.tight_layout()
        fig.savefig("weyl_ladders.png", dpi=120)
        print("wrote weyl_ladders.png")


if __name__ == "__main__":
    main()
