"""Self-similarity of the inverse devil's staircase under tripling.

Multiplying the staircase inverse by 3 shifts its binary digits, so the
pushforward measure reproduces itself and the fiber coefficient at m = 1
has the same modulus at every scale 3^k.  The orbit therefore keeps a
fixed distance from Haar along powers of three -- an explicit obstruction
to convergence on a subsequence -- even though the natural density of
near-Haar times grows steadily with N.
"""

import argparse

import numpy as np

from fibrot import (
    midpoint_grid, cantor_obstruction, density_one_estimate,
    CantorInverseDevil,
)

INF_PRODUCT = 0.3714373567087654     # |prod_{j>=1} cos(2 pi / 3^j)|


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    grid = midpoint_grid(2 ** 16)
    f = CantorInverseDevil(depth=24)

    rep = cantor_obstruction(f, 1, 6, grid)
    print("k    |coefficient at (0,1)| of D_{3^k f}")
    for k, v in zip(rep.k_values, rep.moduli):
        print(f"{k}    {v:.12f}")
    print(f"\ninfinite-product value: {INF_PRODUCT:.12f}")
    print(f"max deviation:          "
          f"{np.max(np.abs(rep.moduli - INF_PRODUCT)):.2e}")

    # density of near-Haar times grows with the horizon but powers of 3
    # stay excluded at threshold ~ modulus/2
    for N in (500, 2000):
        d = density_one_estimate(f, 0.05, N, 8, grid)
        print(f"\ndensity of {{n <= {N}: dist < 0.05}} = {d.density:.4f}")
    thr = INF_PRODUCT / 2 * 0.99
    dist729 = d.distances[728]
    print(f"distance at n = 3^6 = 729: {dist729:.4f}  (threshold {thr:.4f})")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(7, 4))
        n = np.arange(1, d.N + 1)
        ax.plot(n, d.distances, ",", alpha=0.5)
        pw = 3 ** np.arange(7)
        ax.plot(pw, d.distances[pw - 1], "r^", label="n = 3^k")
        ax.axhline(0.05, color="gray", lw=0.6)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("distance to haar")
        ax.legend()
        fig.tight_layout()
        fig.savefig("cantor_orbit.png", dpi=120)
        print("wrote cantor_orbit.png")


if __name__ == "__main__":
    main()
