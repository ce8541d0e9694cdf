"""Experiments on graph-measure orbits D_{nf} and their limit behavior.

The experiments share one computational trick: for a fixed map f the
coefficient columns of D_{nf} are powers of z_i = e^{2 pi i <m, f(x_i)>},
so orbit sweeps reuse exponentials instead of rebuilding tables.

Conventions fixed here once:

* Weyl statistic  S_N = (1/N) sum_{n=0}^{N-1} |joint_coeff(D_{nf}, n_base, m)|^2.
  S_N -> sum of squared atom masses of the pushforward of <m, f> (zero
  exactly when the pushforward is atomless), which is what makes it an
  asynchronicity detector.
* Atom detector: maximal mass of a closed sliding window of width delta on
  the circle.  Window mass upper-bounds any atom mass inside the window,
  so a "no atom above threshold" verdict is conservative.
* Natural density at finite range: |{1 <= n <= N : distance(D_{nf}, haar) < eps}| / N.
  Finite (eps, N) pairs are calibration choices and are reported as such,
  never as limit claims.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fibered_measure import (
    FiberGrid,
    FiberedMeasure,
    make_graph,
    make_haar,
    convolve,
    distance,
    joint_coeff,
    _distance_weights,
)
from .angle_maps import AngleMap, Linear, SmoothCircle, scale, pushforward_samples

__all__ = [
    "OrbitReport",
    "WeylReport",
    "AtomReport",
    "DensityReport",
    "CantorReport",
    "DecayReport",
    "orbit_distances",
    "weyl_statistic",
    "weyl_double_integral_mc",
    "atom_spectrum",
    "density_one_estimate",
    "cantor_obstruction",
    "decay_rate",
]

_TWO_PI_I = 2j * np.pi


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def _fmt(v):
    return repr(float(v))


# ---------------------------------------------------------------------------
# Reports

@dataclass(frozen=True)
class OrbitReport:
    n_values: np.ndarray
    distances: np.ndarray
    n_max: int
    m_max: int

    def to_csv(self, path):
        _write_rows(path, ["n", "distance"],
                    [(int(n), _fmt(d)) for n, d in zip(self.n_values, self.distances)])

    def key_values(self):
        return {"max_distance": float(np.max(self.distances)),
                "min_distance": float(np.min(self.distances))}


@dataclass(frozen=True)
class WeylReport:
    m: tuple
    n_base: int
    N_values: np.ndarray
    S_values: np.ndarray

    @property
    def limit_estimate(self) -> float:
        """Last Cesaro value on the ladder; the limit equals the sum of
        squared atom masses of the pushforward."""
        return float(self.S_values[-1])

    def to_csv(self, path):
        _write_rows(path, ["N", "S_N"],
                    [(int(n), _fmt(s)) for n, s in zip(self.N_values, self.S_values)])

    def key_values(self):
        return {"S_final": self.limit_estimate,
                "N_final": int(self.N_values[-1])}


@dataclass(frozen=True)
class AtomReport:
    m: tuple
    delta: float
    max_window_mass: float
    atoms: list          # (location, window mass) pairs above threshold
    threshold: float
    verdict: bool        # True = no window exceeds threshold ("asynchronous for m")

    def to_csv(self, path):
        _write_rows(path, ["location", "mass"],
                    [(_fmt(loc), _fmt(mass)) for loc, mass in self.atoms])

    def key_values(self):
        return {"max_window_mass": self.max_window_mass,
                "n_atoms": len(self.atoms), "verdict": self.verdict}


@dataclass(frozen=True)
class DensityReport:
    epsilon: float
    N: int
    members: np.ndarray      # bool, index n-1 for n in 1..N
    distances: np.ndarray

    @property
    def density(self) -> float:
        return float(np.mean(self.members))

    def member_set(self) -> np.ndarray:
        return np.nonzero(self.members)[0] + 1

    def to_csv(self, path):
        _write_rows(path, ["n", "distance", "member"],
                    [(n + 1, _fmt(d), int(b))
                     for n, (d, b) in enumerate(zip(self.distances, self.members))])

    def key_values(self):
        return {"density": self.density, "epsilon": self.epsilon, "N": self.N}


@dataclass(frozen=True)
class CantorReport:
    m: int
    k_values: np.ndarray
    moduli: np.ndarray

    def to_csv(self, path):
        _write_rows(path, ["k", "modulus"],
                    [(int(k), _fmt(v)) for k, v in zip(self.k_values, self.moduli)])

    def key_values(self):
        return {"spread": float(np.max(self.moduli) - np.min(self.moduli)),
                "modulus_0": float(self.moduli[0])}


@dataclass(frozen=True)
class DecayReport:
    k_values: np.ndarray
    maxima: np.ndarray
    char_set: tuple

    def to_csv(self, path):
        _write_rows(path, ["k", "max_modulus"],
                    [(int(k), _fmt(v)) for k, v in zip(self.k_values, self.maxima)])

    def key_values(self):
        kmax = self.k_values * self.maxima
        return {"sup_k_times_max": float(np.max(kmax))}


# ---------------------------------------------------------------------------
# Orbit distances and density

def _distance_series_1d(f, grid, n_set, n_max, m_max, mu0=None):
    """distance(D_{nf} * mu0, haar) for each n, d = 1 fast path.

    Only characters with m != 0 contribute: the m = 0 joint coefficients of
    any measure here equal those of haar identically (fiber mass is 1), so
    their difference vanishes exactly.
    """
    x = grid.circle_coord
    w = grid.weights
    vals = f.values_on(grid)[:, 0]
    nrange = np.arange(-n_max, n_max + 1)
    E = np.exp(_TWO_PI_I * np.outer(nrange, x)) * w       # (2n+1, Q)
    wts = _distance_weights(n_max, m_max, 1)              # (2n+1, 2m+1)
    pos = wts[:, m_max + 1:]                              # m = 1..M
    neg = wts[:, :m_max][:, ::-1]                         # m = -1..-M
    if mu0 is not None:
        cols0 = np.stack([mu0.fiber_column(m) for m in range(1, m_max + 1)],
                         axis=1)                          # (Q, M)
    out = np.empty(len(n_set))
    for j, n in enumerate(n_set):
        vn = np.mod(n * vals, 1.0)
        z = np.exp(_TWO_PI_I * vn)
        cols = np.empty((grid.size, m_max), dtype=complex)
        p = np.ones(grid.size, dtype=complex)
        for m in range(m_max):
            p = p * z
            cols[:, m] = p
        if mu0 is not None:
            cols = cols * cols0
        J = np.abs(E @ cols)                              # (2n+1, M), m = 1..M
        # haar joint coefficients vanish for m != 0; Hermitian symmetry of a
        # real measure gives |J(-n,-m)| = |J(n,m)|, so m < 0 reuses J flipped.
        out[j] = float(np.sum(pos * J) + np.sum(neg * J[::-1]))
    return out


def orbit_distances(f: AngleMap, mu0: Optional[FiberedMeasure], n_set,
                    n_max: int, grid: FiberGrid, m_max: int = 8) -> OrbitReport:
    """distance(D_{nf} * mu0, haar) over n_set; mu0 = None means D_0.

    D_{nf} is built directly from n*f (exact scaling) rather than by
    repeated convolution, so errors do not accumulate along the orbit.
    """
    n_set = np.asarray(list(n_set), dtype=int)
    if mu0 is not None and np.all(mu0.coeff == 1.0):
        mu0 = None                                        # identity element
    if f.d == 1 and grid.circle_coord is not None:
        dists = _distance_series_1d(f, grid, n_set, n_max, m_max, mu0)
    else:
        lam = make_haar(grid, f.d, m_max)
        dists = np.empty(len(n_set))
        for j, n in enumerate(n_set):
            mu = make_graph(scale(int(n), f), grid, m_max)
            if mu0 is not None:
                mu = convolve(mu, mu0)
            dists[j] = distance(mu, lam, n_max)
    return OrbitReport(n_values=n_set, distances=dists, n_max=n_max, m_max=m_max)


def density_one_estimate(f: AngleMap, eps: float, N: int, n_max: int,
                         grid: FiberGrid, m_max: int = 8) -> DensityReport:
    """Members of {1..N} with distance(D_{nf}, haar) < eps, and their density."""
    if eps <= 0 or N < 1:
        raise ValueError("need eps > 0 and N >= 1")
    rep = orbit_distances(f, None, range(1, N + 1), n_max, grid, m_max)
    return DensityReport(epsilon=eps, N=N, members=rep.distances < eps,
                         distances=rep.distances)


# ---------------------------------------------------------------------------
# Weyl statistic

def _ladder(N: int) -> np.ndarray:
    ns = []
    k = 1
    while k < N:
        ns.append(k)
        k *= 2
    ns.append(N)
    return np.array(ns, dtype=int)


def weyl_statistic(f: AngleMap, m, N: int, grid: FiberGrid,
                   n_base: int = 0) -> WeylReport:
    """Cesaro second moment of joint coefficients along the scaling orbit.

    S_N = (1/N) sum_{n<N} |sum_i w_i e^{2 pi i n_base x_i} e^{2 pi i n <m, f(x_i)>}|^2,
    evaluated at every N on a doubling ladder up to the bound.
    """
    m = np.atleast_1d(np.asarray(m, dtype=int))
    if not np.any(m):
        raise ValueError("fiber character m must be nonzero")
    if N < 1:
        raise ValueError("need N >= 1")
    vals, w = pushforward_samples(f, grid, m)
    z = np.exp(_TWO_PI_I * vals)
    if n_base == 0:
        e = w.astype(complex)
    else:
        if grid.circle_coord is None:
            raise ValueError("nonzero base character on a grid without "
                             "circle coordinates")
        e = w * np.exp(_TWO_PI_I * n_base * grid.circle_coord)
    ladder = _ladder(N)
    S = np.empty(len(ladder))
    p = np.ones(grid.size, dtype=complex)
    acc = 0.0
    nxt = 0
    for n in range(N):
        if n > 0:
            p *= z
        acc += abs(np.dot(e, p)) ** 2
        if n + 1 == ladder[nxt]:
            S[nxt] = acc / (n + 1)
            nxt += 1
    return WeylReport(m=tuple(int(v) for v in m), n_base=int(n_base),
                      N_values=ladder, S_values=S)


def weyl_double_integral_mc(f: AngleMap, m, N: int, grid: FiberGrid,
                            n_base: int = 0, pairs: int = 20000,
                            seed: int = 0):
    """Pair-sampled form of S_N.

    Expanding |sum_i ...|^2 gives a double sum over node pairs with the
    geometric kernel G_N(r) = (1/N) sum_{n<N} r^n at r = z_i conj(z_j);
    sampling pairs (i, j) proportionally to w_i w_j yields an unbiased
    estimate of S_N.  Returns (estimate, sigma) with sigma the standard
    error of the mean.
    """
    rng = np.random.default_rng(seed)
    vals, w = pushforward_samples(f, grid, m)
    z = np.exp(_TWO_PI_I * vals)
    q = grid.size
    uniform = np.allclose(w, 1.0 / q, rtol=0, atol=1e-15)
    if uniform:
        ii = rng.integers(0, q, size=pairs)
        jj = rng.integers(0, q, size=pairs)
    else:
        ii = rng.choice(q, size=pairs, p=w)
        jj = rng.choice(q, size=pairs, p=w)
    r = z[ii] * np.conj(z[jj])
    near1 = np.abs(1.0 - r) < 1e-9
    geom = np.where(near1, 1.0, (1.0 - r ** N) / (N * (1.0 - np.where(near1, 2.0, r))))
    if n_base != 0:
        x = grid.circle_coord
        geom = geom * np.exp(_TWO_PI_I * n_base * (x[ii] - x[jj]))
    samples = geom.real
    est = float(np.mean(samples))
    sigma = float(np.std(samples, ddof=1) / np.sqrt(pairs))
    return est, sigma


# ---------------------------------------------------------------------------
# Atom spectrum

def atom_spectrum(f: AngleMap, grid: FiberGrid, m, delta: float,
                  threshold: float = 0.05) -> AtomReport:
    """Greatest mass of a closed circular window of width delta.

    The pushforward samples of <m, f> are sorted; for every left endpoint
    at a sample the window [v, v + delta] (wrapping mod 1) collects the
    weights inside.  The maximum over left endpoints equals the maximum
    over all closed windows.  Windows above threshold are merged
    greedily into the reported atom list.
    """
    if not 0 < delta < 1:
        raise ValueError("window width must lie in (0,1)")
    vals, w = pushforward_samples(f, grid, m)
    order = np.argsort(vals, kind="stable")
    v = vals[order]
    ww = w[order]
    q = v.shape[0]
    ext = np.concatenate([v, v + 1.0])
    cum = np.concatenate([[0.0], np.cumsum(np.concatenate([ww, ww]))])
    hi = np.searchsorted(ext, v + delta, side="right")
    masses = cum[hi] - cum[np.arange(q)]
    masses = np.minimum(masses, 1.0)                     # delta-window of everything
    imax = int(np.argmax(masses))
    max_mass = float(masses[imax])
    atoms = []
    blocked_until = -np.inf
    for i in np.nonzero(masses > threshold)[0]:
        if v[i] < blocked_until:
            continue
        atoms.append((float(np.mod(v[i] + delta / 2, 1.0)), float(masses[i])))
        blocked_until = v[i] + delta
    return AtomReport(m=tuple(np.atleast_1d(m).astype(int).tolist()),
                      delta=float(delta), max_window_mass=max_mass,
                      atoms=atoms, threshold=float(threshold),
                      verdict=max_mass <= threshold)


# ---------------------------------------------------------------------------
# Cantor obstruction and C^2 decay

def cantor_obstruction(f, m: int, k_max: int, grid: FiberGrid) -> CantorReport:
    """|fiber coefficient of D_{3^k f} at (0, m)| for k = 0..k_max.

    Ternary self-similarity predicts a constant sequence: multiplying the
    inverse staircase by 3 shifts binary digits, which re-produces the same
    pushforward measure at one level less depth.  The scaled values are
    computed by exact digit shifts (values_shifted), never by the float
    product 3^k * f(x).
    """
    if m == 0:
        raise ValueError("fiber character m must be nonzero")
    if not hasattr(f, "values_shifted"):
        raise TypeError("cantor_obstruction needs a digit-shiftable map "
                        "(CantorInverseDevil)")
    ks = np.arange(k_max + 1)
    w = grid.weights
    moduli = np.empty(len(ks))
    for k in ks:
        vk = f.values_shifted(grid, int(k))[:, 0]
        moduli[k] = abs(np.dot(w, np.exp(_TWO_PI_I * m * vk)))
    return CantorReport(m=int(m), k_values=ks, moduli=moduli)


def decay_rate(f: AngleMap, k_list, char_set, grid: FiberGrid) -> DecayReport:
    """max over (n, m) in char_set of |joint coefficient of D_{kf}| per k.

    Eligible maps must carry a certified non-vanishing derivative
    (SmoothCircle, or Linear with nonzero slope); for those the maxima obey
    k * max = O(1).
    """
    eligible = isinstance(f, SmoothCircle) or (
        isinstance(f, Linear) and np.all(f.alpha != 0))
    if not eligible:
        raise ValueError("decay_rate needs a map with certified nonzero "
                         "derivative (SmoothCircle or nondegenerate Linear)")
    char_set = [(int(n), int(m)) for n, m in char_set]
    if any(m == 0 for _, m in char_set):
        raise ValueError("char_set must have m != 0 throughout")
    x = grid.circle_coord
    w = grid.weights
    vals = f.values_on(grid)[:, 0]
    base = {n: w * np.exp(_TWO_PI_I * n * x) for n in {n for n, _ in char_set}}
    k_list = np.asarray(list(k_list), dtype=int)
    maxima = np.empty(len(k_list))
    for j, k in enumerate(k_list):
        vk = np.mod(k * vals, 1.0)
        zc = {m: np.exp(_TWO_PI_I * m * vk) for m in {m for _, m in char_set}}
        maxima[j] = max(abs(np.dot(base[n], zc[m])) for n, m in char_set)
    return DecayReport(k_values=k_list, maxima=maxima,
                       char_set=tuple(char_set))
