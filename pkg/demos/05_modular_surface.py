"""Haar sampling and Gauss reduction on the modular surface.

Draws a Haar cloud of fundamental-domain representatives, checks the two
closed-form moments of the height v, and walks one far-away group element
back into the domain, printing every tau along the way.
"""

import argparse

import numpy as np

from fibrot import haar_sample, reduce_to_domain, tau


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", action="store_true")
    ap.add_argument("--n", type=int, default=20000)
    args = ap.parse_args()

    rng = np.random.default_rng(1)
    xs = haar_sample(rng, args.n)
    t = (xs[:, 0, 1] + 1j * xs[:, 1, 1]) / (xs[:, 0, 0] + 1j * xs[:, 1, 0])
    u, v = t.real, t.imag

    print(f"{args.n} Haar samples")
    print(f"  |u| <= 1/2:      {np.max(np.abs(u)) <= 0.5}")
    print(f"  u^2 + v^2 >= 1:  {np.min(u * u + v * v) >= 1 - 1e-12}")
    print(f"  E[1/v]  = {np.mean(1 / v):.5f}   target 3 ln3/2pi = "
          f"{3 * np.log(3) / (2 * np.pi):.5f}")
    print(f"  P(v>2)  = {np.mean(v > 2):.5f}   target 3/2pi     = "
          f"{3 / (2 * np.pi):.5f}")

    # reduce an element far out in the cusp and show the walk
    far = 17.3 + 0.02j
    s = np.sqrt(far.imag)
    g = np.array([[1 / s, far.real / s], [0.0, s]])
    x, gam = reduce_to_domain(g)
    print(f"\nreduce tau = {far}:")
    print(f"  reduced tau = {tau(x):.6f}")
    print(f"  gamma =\n{gam}")
    print(f"  det gamma = {gam[0, 0] * gam[1, 1] - gam[0, 1] * gam[1, 0]}")
    adj = np.array([[gam[1, 1], -gam[0, 1]], [-gam[1, 0], gam[0, 0]]],
                   dtype=float)
    print(f"  reconstruction error = {np.max(np.abs(x @ adj - g)):.2e}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(5, 6))
        ax.plot(u, np.minimum(v, 4.0), ",", alpha=0.4)
        th = np.linspace(np.pi / 3, 2 * np.pi / 3, 100)
        ax.plot(np.cos(th), np.sin(th), "k-", lw=0.8)
        ax.axvline(-0.5, color="k", lw=0.8)
        ax.axvline(0.5, color="k", lw=0.8)
        ax.set_xlim(-0.7, 0.7)
        ax.set_ylim(0, 4)
        ax.set_xlabel("u")
        ax.set_ylabel("v (clipped at 4)")
        fig.tight_layout()
        fig.savefig("haar_cloud.png", dpi=120)
        print("\nwrote haar_cloud.png")


if __name__ == "__main__":
    main()
