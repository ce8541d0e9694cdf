"""Why the convolution product is not continuous in the weak topology.

Along f(x) = x the graph measures D_{kf} converge to Haar: every joint
coefficient with |n| <= 8, |m| <= 8 dies as soon as k > 8.  Yet each D_{kf}
convolved with its inverse D_{-kf} snaps back to D_0, which sits at maximal
distance from Haar.  The two curves below separate permanently.
"""

import argparse

import numpy as np

from fibrot import (
    midpoint_grid, make_graph, make_haar, convolve, distance,
    Linear, scale, orbit_distances,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    grid = midpoint_grid(4096)
    f = Linear([1.0])
    lam = make_haar(grid, 1, 8)
    ks = np.unique(np.round(np.geomspace(1, 200, 40)).astype(int))

    toward = orbit_distances(f, None, ks, 8, grid).distances
    back = np.array([
        distance(convolve(make_graph(scale(int(k), f), grid, 8),
                          make_graph(scale(-int(k), f), grid, 8)), lam, 8)
        for k in ks])

    print(" k    dist(D_kf, haar)   dist(D_kf * D_-kf, haar)")
    for k, a, b in zip(ks, toward, back):
        print(f"{k:4d}   {a:16.12f}   {b:20.12f}")
    print("\nfirst column collapses to 0 at k = 9; second stays at"
          f" {2 * (1 - 2 ** -8)}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogx(ks, toward, "o-", label="dist(D_kf, haar)")
        ax.semilogx(ks, back, "s-", label="dist(D_kf * D_-kf, haar)")
        ax.set_xlabel("k")
        ax.set_ylabel("distance")
        ax.legend()
        fig.tight_layout()
        fig.savefig("discontinuity.png", dpi=120)
        print("wrote discontinuity.png")


if __name__ == "__main__":
    main()
