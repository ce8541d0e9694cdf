"""Measures on [0,1] x T^d with Lebesgue base marginal.

A measure mu is stored through its disintegration over a finite grid
approximating the base: node i carries weight w_i and a fiber probability
measure mu^{x_i} on T^d, represented by its Fourier-Stieltjes coefficients

    coeff[i, m] = muhat^{x_i}(m) = int_{T^d} e^{2 pi i <m,y>} d mu^{x_i}(y),

truncated to ||m||_inf <= M_max.  In this basis the fiberwise convolution
of two measures is the pointwise product of their tables, so the monoid
structure (commutativity, associativity, the graph measure of the zero map
as identity, product Haar as absorbing element) holds to rounding error.

Joint characters combine a base frequency n with a fiber frequency m:

    joint_coeff(mu, n, m) = sum_i w_i e^{2 pi i n x_i} coeff[i, m],

and the truncated weak-* distance between two measures is the weighted sum
of |joint difference| over all (n, m) != (0, 0) with weights
2^{-(|n| + ||m||_1)}.  The weights make the distance a pseudometric that
detects exactly the characters inside the truncation box.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "FiberGrid",
    "FiberedMeasure",
    "midpoint_grid",
    "make_haar",
    "make_graph",
    "convolve",
    "monoid_power",
    "joint_coeff",
    "joint_table",
    "distance",
    "save_measure_csv",
    "load_measure_csv",
]

_TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class FiberGrid:
    """Finite approximation of the base probability space.

    weights: probability weights per node (sum to 1).
    circle_coord: node positions in [0,1) when the base is the circle;
        None for abstract sample sets (e.g. Haar samples of a fundamental
        domain), in which case only n = 0 base characters exist.
    """

    weights: np.ndarray
    circle_coord: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0):
            raise ValueError("grid weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("grid weights must sum to 1 within 1e-12")
        if self.circle_coord is not None:
            x = np.asarray(self.circle_coord, dtype=float)
            if x.shape != w.shape:
                raise ValueError("circle_coord and weights must have equal length")
            if np.any((x < 0) | (x >= 1)):
                raise ValueError("circle coordinates must lie in [0,1)")
            object.__setattr__(self, "circle_coord", x)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiberGrid):
            return NotImplemented
        if (self.circle_coord is None) != (other.circle_coord is None):
            return False
        if not np.array_equal(self.weights, other.weights):
            return False
        if self.circle_coord is not None and not np.array_equal(
            self.circle_coord, other.circle_coord
        ):
            return False
        return True


def midpoint_grid(q: int) -> FiberGrid:
    """Equispaced midpoint grid x_i = (i + 1/2)/q with uniform weights.

    Midpoints keep dyadic q exactly representable and make joint
    coefficients of linear maps vanish exactly for unresolved characters.
    """
    if q < 1:
        raise ValueError("grid size must be >= 1")
    x = (np.arange(q) + 0.5) / q
    return FiberGrid(weights=np.full(q, 1.0 / q), circle_coord=x)


@dataclass(frozen=True)
class FiberedMeasure:
    """Truncated coefficient table of a fibered measure.

    coeff has shape (grid.size,) + (2*M_max+1,)*d; fiber frequency m is
    stored at index M_max + m componentwise.
    """

    grid: FiberGrid
    d: int
    M_max: int
    coeff: np.ndarray

    def __post_init__(self):
        expect = (self.grid.size,) + (2 * self.M_max + 1,) * self.d
        if self.coeff.shape != expect:
            raise ValueError(
                f"coefficient table has shape {self.coeff.shape}, expected {expect}"
            )

    def _mindex(self, m) -> tuple:
        m = _as_mvector(m, self.d)
        if np.max(np.abs(m)) > self.M_max:
            raise ValueError(f"fiber character {m.tolist()} outside truncation "
                             f"||m||_inf <= {self.M_max}")
        return tuple(int(self.M_max + mi) for mi in m)

    def fiber_column(self, m) -> np.ndarray:
        """coeff[:, m] as a length-Q complex vector."""
        idx = (slice(None),) + self._mindex(m)
        return self.coeff[idx]

    def validate(self, tol: float = 1e-12) -> None:
        """Check probability/modulus/Hermitian invariants of the table."""
        center = (slice(None),) + (self.M_max,) * self.d
        if not np.all(self.coeff[center] == 1.0):
            raise ValueError("coeff[i][0] must equal 1 exactly")
        if np.max(np.abs(self.coeff)) > 1 + tol:
            raise ValueError("fiber coefficients must have modulus <= 1")
        flipped = self.coeff[(slice(None),) + (slice(None, None, -1),) * self.d]
        if np.max(np.abs(self.coeff - np.conj(flipped))) > tol:
            raise ValueError("fiber measures must be real: coeff[-m] = conj(coeff[m])")


def _as_mvector(m, d: int) -> np.ndarray:
    m = np.atleast_1d(np.asarray(m, dtype=int))
    if m.shape != (d,):
        raise ValueError(f"fiber character must have length {d}, got shape {m.shape}")
    return m


def make_haar(grid: FiberGrid, d: int, m_max: int) -> FiberedMeasure:
    """Product of the base marginal with Haar on T^d: 1 at m = 0, else 0."""
    if d < 1 or m_max < 1:
        raise ValueError("need d >= 1 and M_max >= 1")
    coeff = np.zeros((grid.size,) + (2 * m_max + 1,) * d, dtype=complex)
    coeff[(slice(None),) + (m_max,) * d] = 1.0
    return FiberedMeasure(grid=grid, d=d, M_max=m_max, coeff=coeff)


def make_graph(f, grid: FiberGrid, m_max: int) -> FiberedMeasure:
    """Graph measure D_f: the fiber over x_i is the Dirac mass at f(x_i).

    coeff[i, m] = e^{2 pi i <m, f(x_i)>}; every entry has modulus 1.
    """
    if m_max < 1:
        raise ValueError("need M_max >= 1")
    vals = f.values_on(grid)                      # (Q, d) in [0,1)
    d = vals.shape[1]
    marange = np.arange(-m_max, m_max + 1)
    phase = np.zeros((grid.size,) + (2 * m_max + 1,) * d)
    for axis in range(d):
        shape = [1] * (d + 1)
        shape[0] = grid.size
        v = vals[:, axis].reshape(shape)
        shape = [1] * (d + 1)
        shape[1 + axis] = 2 * m_max + 1
        phase = phase + v * marange.reshape(shape)
    return FiberedMeasure(grid=grid, d=d, M_max=m_max,
                          coeff=np.exp(_TWO_PI_I * phase))


def _check_compatible(mu: FiberedMeasure, nu: FiberedMeasure) -> None:
    if mu.d != nu.d or mu.M_max != nu.M_max or mu.grid != nu.grid:
        raise ValueError("measures live on different grids or truncations")


def convolve(mu: FiberedMeasure, nu: FiberedMeasure) -> FiberedMeasure:
    """Fiberwise convolution: coefficient tables multiply pointwise."""
    _check_compatible(mu, nu)
    return FiberedMeasure(grid=mu.grid, d=mu.d, M_max=mu.M_max,
                          coeff=mu.coeff * nu.coeff)


def monoid_power(mu: FiberedMeasure, k: int) -> FiberedMeasure:
    """k-fold convolution power; k = 0 gives the monoid identity D_0."""
    if k < 0:
        raise ValueError("power must be >= 0")
    return FiberedMeasure(grid=mu.grid, d=mu.d, M_max=mu.M_max,
                          coeff=mu.coeff ** k)


def joint_coeff(mu: FiberedMeasure, n: int, m) -> complex:
    """Character integral sum_i w_i e^{2 pi i n x_i} coeff[i, m]."""
    col = mu.fiber_column(m)
    if n != 0 and mu.grid.circle_coord is None:
        raise ValueError("nonzero base character on a grid without circle "
                         "coordinates")
    w = mu.grid.weights
    if n == 0:
        return complex(np.dot(w, col))
    phases = np.exp(_TWO_PI_I * n * mu.grid.circle_coord)
    return complex(np.dot(w * phases, col))


def joint_table(mu: FiberedMeasure, n_max: int) -> np.ndarray:
    """All joint coefficients for |n| <= n_max, shape (2n_max+1,) + m-box.

    Grids without circle coordinates only support n_max = 0.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    q = mu.grid.size
    flat = mu.coeff.reshape(q, -1)
    if mu.grid.circle_coord is None:
        if n_max > 0:
            raise ValueError("nonzero base characters need circle coordinates")
        row = mu.grid.weights @ flat
        return row.reshape((1,) + mu.coeff.shape[1:])
    nrange = np.arange(-n_max, n_max + 1)
    base = np.exp(_TWO_PI_I * np.outer(nrange, mu.grid.circle_coord))
    table = (base * mu.grid.weights) @ flat
    return table.reshape((2 * n_max + 1,) + mu.coeff.shape[1:])


@lru_cache(maxsize=32)
def _distance_weights(n_max: int, m_max: int, d: int):
    """2^{-(|n| + ||m||_1)} over the truncation box, 0 at (n,m) = (0,0)."""
    nabs = np.abs(np.arange(-n_max, n_max + 1))
    m1 = np.zeros((2 * m_max + 1,) * d)
    marange = np.abs(np.arange(-m_max, m_max + 1))
    for axis in range(d):
        shape = [1] * d
        shape[axis] = 2 * m_max + 1
        m1 = m1 + marange.reshape(shape)
    w = 2.0 ** -(nabs.reshape((-1,) + (1,) * d) + m1)
    w[(n_max,) + (m_max,) * d] = 0.0
    w.setflags(write=False)
    return w


def distance(mu: FiberedMeasure, nu: FiberedMeasure, n_max: int) -> float:
    """Truncated weak-* pseudometric.

    sum over (n, m) != (0, 0), |n| <= n_max, ||m||_inf <= M_max of
    2^{-(|n| + ||m||_1)} |joint_coeff(mu) - joint_coeff(nu)|.  Zero iff all
    truncated joint coefficients agree; n_max is forced to 0 on grids
    without circle coordinates.
    """
    _check_compatible(mu, nu)
    if mu.grid.circle_coord is None:
        n_max = 0
    diff = np.abs(joint_table(mu, n_max) - joint_table(nu, n_max))
    return float(np.sum(_distance_weights(n_max, mu.M_max, mu.d) * diff))


# ---------------------------------------------------------------------------
# CSV round trip

def save_measure_csv(mu: FiberedMeasure, path) -> None:
    """One row per (node, fiber character): node_index, weight,
    circle_coord (empty when absent), m1..md, re, im."""
    mcols = [f"m{j + 1}" for j in range(mu.d)]
    marange = np.arange(-mu.M_max, mu.M_max + 1)
    mgrids = np.meshgrid(*([marange] * mu.d), indexing="ij")
    mflat = np.stack([g.ravel() for g in mgrids], axis=1)   # (n_chars, d)
    flat = mu.coeff.reshape(mu.grid.size, -1)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["node_index", "weight", "circle_coord", *mcols, "re", "im"])
        for i in range(mu.grid.size):
            w = repr(float(mu.grid.weights[i]))
            x = "" if mu.grid.circle_coord is None else repr(float(mu.grid.circle_coord[i]))
            for j in range(mflat.shape[0]):
                c = flat[i, j]
                wr.writerow([i, w, x, *(int(v) for v in mflat[j]),
                             repr(float(c.real)), repr(float(c.imag))])


def load_measure_csv(path) -> FiberedMeasure:
    """Rebuild a measure saved by :func:`save_measure_csv`."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        mcols = [h for h in header if h.startswith("m") and h[1:].isdigit()]
        d = len(mcols)
        if header[:3] != ["node_index", "weight", "circle_coord"] or d < 1:
            raise ValueError(f"unrecognized measure CSV header: {header}")
        rows = list(rd)
    nodes = np.array([int(r[0]) for r in rows])
    q = nodes.max() + 1
    mvecs = np.array([[int(v) for v in r[3:3 + d]] for r in rows])
    m_max = int(np.abs(mvecs).max())
    if m_max < 1:
        raise ValueError("measure CSV carries no nontrivial fiber characters")
    weights = np.zeros(q)
    circle = np.full(q, np.nan)
    has_circle = rows[0][2] != ""
    coeff = np.zeros((q,) + (2 * m_max + 1,) * d, dtype=complex)
    for r in rows:
        i = int(r[0])
        weights[i] = float(r[1])
        if has_circle:
            circle[i] = float(r[2])
        idx = (i,) + tuple(m_max + int(v) for v in r[3:3 + d])
        coeff[idx] = complex(float(r[3 + d]), float(r[4 + d]))
    grid = FiberGrid(weights=weights,
                     circle_coord=circle if has_circle else None)
    return FiberedMeasure(grid=grid, d=d, M_max=m_max, coeff=coeff)
