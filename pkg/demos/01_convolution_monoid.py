"""Fiberwise convolution as coefficient-table multiplication.

Builds a few graph measures on [0,1] x T, convolves them, and checks the
monoid structure by hand: D_0 is the identity, Haar absorbs everything,
and graphs invert each other.  Run with --plot to save a picture of the
coefficient tables before and after convolution.
"""

import argparse

import numpy as np

from fibrot import (
    midpoint_grid, make_graph, make_haar, convolve, distance,
    Linear, SmoothCircle, Tabulated,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    grid = midpoint_grid(512)
    f = SmoothCircle(0.5)
    g = Linear([0.37])

    Df = make_graph(f, grid, 8)
    Dg = make_graph(g, grid, 8)
    lam = make_haar(grid, 1, 8)
    one = make_graph(Tabulated(np.zeros(512)), grid, 8)

    prod = convolve(Df, Dg)
    print("coefficient table shape:", prod.coeff.shape)
    print("D_f * D_0 == D_f exactly:",
          np.array_equal(convolve(Df, one).coeff, Df.coeff))
    print("D_f * haar == haar exactly:",
          np.array_equal(convolve(Df, lam).coeff, lam.coeff))

    inv = make_graph(Tabulated(-f.values_on(grid)[:, 0]), grid, 8)
    err = np.max(np.abs(convolve(Df, inv).coeff - one.coeff))
    print(f"D_f * D_(-f) vs identity, max error: {err:.2e}")

    print(f"\ndistance(D_f, haar)        = {distance(Df, lam, 8):.6f}")
    print(f"distance(D_f * D_g, haar)  = {distance(prod, lam, 8):.6f}")
    print(f"distance(D_0, haar)        = {distance(one, lam, 8):.6f}"
          f"   (the maximum, 2(1 - 2^-8) = {2 * (1 - 2 ** -8)})")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, axes = plt.subplots(1, 3, figsize=(12, 3.2), sharey=True)
        for ax, (mu, title) in zip(axes, [(Df, "D_f"), (Dg, "D_g"),
                                          (prod, "D_f * D_g")]):
            ax.imshow(np.abs(mu.coeff[:64]).T, aspect="auto", origin="lower",
                      extent=(0, 64, -8, 8))
            ax.set_title(f"|coeff| of {title}")
            ax.set_xlabel("node")
        axes[0].set_ylabel("fiber character m")
        fig.tight_layout()
        fig.savefig("monoid_tables.png", dpi=120)
        print("\nwrote monoid_tables.png")


if __name__ == "__main__":
    main()
