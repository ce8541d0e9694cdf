"""Angle maps f: [0,1] -> T^d and their exact combinators.

Every family evaluates in [0,1)^d and knows how to serialize itself to a
JSON descriptor ``{"family": ..., "params": ..., "d": ...}`` so CLI runs
can reconstruct maps from config files.  Integer scaling and sums are
first-class because graph measures turn them into convolution identities:
D_{kf} = D_f^{*k} and D_{f+g} = D_f * D_g.
"""

from __future__ import annotations

import numpy as np

from .fibered_measure import FiberGrid

__all__ = [
    "AngleMap",
    "Linear",
    "SmoothCircle",
    "CantorInverseDevil",
    "PiecewiseConstant",
    "Tabulated",
    "HomogeneousInduced",
    "ScaledMap",
    "SumMap",
    "scale",
    "map_sum",
    "pushforward_samples",
    "map_from_descriptor",
]


class AngleMap:
    """Base class: subclasses provide d and values_on(grid) -> (Q, d)."""

    d: int

    def values_on(self, grid: FiberGrid) -> np.ndarray:
        raise NotImplementedError

    def value_at(self, x: float) -> np.ndarray:
        """Pointwise evaluation for families defined on all of [0,1)."""
        raise NotImplementedError(f"{type(self).__name__} is grid-tabulated; "
                                  "evaluate through a node index")

    def descriptor(self) -> dict:
        raise NotImplementedError

    def _coords(self, grid: FiberGrid) -> np.ndarray:
        if grid.circle_coord is None:
            raise ValueError(f"{type(self).__name__} needs circle coordinates "
                             "on the grid")
        return grid.circle_coord


class Linear(AngleMap):
    """f(x) = (alpha x + c) mod 1 componentwise."""

    def __init__(self, alpha, c=None, d: int | None = None):
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        if d is not None and alpha.shape != (d,):
            raise ValueError("alpha length disagrees with d")
        self.alpha = alpha
        self.d = alpha.shape[0]
        self.c = (np.zeros(self.d) if c is None
                  else np.mod(np.atleast_1d(np.asarray(c, dtype=float)), 1.0))
        if self.c.shape != (self.d,):
            raise ValueError("offset length disagrees with alpha")

    def values_on(self, grid):
        x = self._coords(grid)
        return np.mod(np.outer(x, self.alpha) + self.c, 1.0)

    def value_at(self, x):
        return np.mod(self.alpha * float(x) + self.c, 1.0)

    def descriptor(self):
        return {"family": "linear",
                "params": {"alpha": self.alpha.tolist(), "c": self.c.tolist()},
                "d": self.d}


class SmoothCircle(AngleMap):
    """f(x) = x + (eps/2pi) sin(2 pi x) mod 1, |eps| < 1.

    The derivative 1 + eps cos(2 pi x) stays positive, so the map is a C^2
    circle diffeomorphism and its graph-measure joint coefficients decay in
    the scaling parameter (non-stationary-phase regime for small |n|).
    eps = 0 degenerates to the identity rotation number case.
    """

    d = 1

    def __init__(self, eps: float):
        eps = float(eps)
        if not -1 < eps < 1:
            raise ValueError("need |eps| < 1 for a positive derivative")
        self.eps = eps

    def values_on(self, grid):
        x = self._coords(grid)
        return np.mod(x + (self.eps / (2 * np.pi)) * np.sin(2 * np.pi * x),
                      1.0)[:, None]

    def value_at(self, x):
        x = float(x)
        return np.atleast_1d(
            np.mod(x + (self.eps / (2 * np.pi)) * np.sin(2 * np.pi * x), 1.0))

    def derivative_lower_bound(self) -> float:
        return 1.0 - abs(self.eps)

    def descriptor(self):
        return {"family": "smooth_circle", "params": {"eps": self.eps}, "d": 1}


class CantorInverseDevil(AngleMap):
    """Inverse of the devil's staircase, truncated at B binary digits.

    f(x) = sum_{j=1..B} 2 b_j 3^{-j} where 0.b_1 b_2 ... is the binary
    expansion of x (terminating expansion at dyadic rationals).  The image
    lies in the depth-B approximation of the middle-thirds Cantor set, and
    the pushforward of Lebesgue is the uniform Cantor measure at depth B.
    Multiplication by 3 shifts digits: 3 f(x) mod 1 equals the depth-(B-1)
    value built from b_2 b_3 ..., which this class exposes exactly through
    ``values_shifted``.  Truncation error vs. the infinite expansion is at
    most 3^{-B} in sup norm.
    """

    d = 1

    def __init__(self, depth: int = 24):
        depth = int(depth)
        if not 8 <= depth <= 53:
            raise ValueError("depth must lie in [8, 53]")
        self.depth = depth

    @staticmethod
    def _digit_sum(t: np.ndarray, depth: int) -> np.ndarray:
        out = np.zeros_like(t)
        t = t.copy()
        p = 1.0
        for _ in range(depth):
            t *= 2.0
            b = np.floor(t)
            t -= b
            p /= 3.0
            out += (2.0 * p) * b
        return out

    def values_on(self, grid):
        return self._digit_sum(self._coords(grid), self.depth)[:, None]

    def value_at(self, x):
        return np.atleast_1d(
            self._digit_sum(np.array([float(x)]), self.depth)[0])

    def values_shifted(self, grid: FiberGrid, k: int) -> np.ndarray:
        """Exact 3^k f(x) mod 1: digits shifted by k, depth reduced to B-k.

        Exactness matters: computing 3^k * f(x) mod 1 in floats loses
        ~3^k ulp, while the digit shift is exact binary arithmetic.
        """
        if not 0 <= k <= self.depth - 2:
            raise ValueError(f"digit shift k must lie in [0, {self.depth - 2}]")
        t = np.mod(self._coords(grid) * float(2 ** k), 1.0)
        return self._digit_sum(t, self.depth - k)[:, None]

    def descriptor(self):
        return {"family": "cantor_inverse_devil",
                "params": {"depth": self.depth}, "d": 1}


class PiecewiseConstant(AngleMap):
    """Finitely many values; right-continuous at the breakpoints.

    breakpoints b_1 < ... < b_{r-1} in (0,1) split [0,1) into r pieces
    [0,b_1), [b_1,b_2), ..., [b_{r-1},1); values has one row per piece.
    The pushforward of any nonzero character has atoms, so these maps are
    synchronous by construction.
    """

    def __init__(self, breakpoints, values):
        br = np.atleast_1d(np.asarray(breakpoints, dtype=float))
        vals = np.atleast_2d(np.asarray(values, dtype=float))
        if np.any(np.diff(br) <= 0) or (br.size and (br[0] <= 0 or br[-1] >= 1)):
            raise ValueError("breakpoints must be strictly increasing in (0,1)")
        if vals.shape[0] != br.size + 1:
            raise ValueError("need one value row per piece")
        self.breakpoints = br
        self.values = np.mod(vals, 1.0)
        self.d = vals.shape[1]

    def values_on(self, grid):
        idx = np.searchsorted(self.breakpoints, self._coords(grid), side="right")
        return self.values[idx]

    def value_at(self, x):
        idx = int(np.searchsorted(self.breakpoints, float(x), side="right"))
        return self.values[idx]

    def descriptor(self):
        return {"family": "piecewise_constant",
                "params": {"breakpoints": self.breakpoints.tolist(),
                           "values": self.values.tolist()},
                "d": self.d}


class Tabulated(AngleMap):
    """One value per grid node; evaluation is lookup by node index."""

    def __init__(self, values):
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        self.values = np.mod(vals, 1.0)
        self.d = self.values.shape[1]

    def values_on(self, grid):
        if grid.size != self.values.shape[0]:
            raise ValueError(f"table has {self.values.shape[0]} nodes, "
                             f"grid has {grid.size}")
        return self.values

    def descriptor(self):
        return {"family": "tabulated",
                "params": {"values": self.values.tolist()}, "d": self.d}


class HomogeneousInduced(Tabulated):
    """Angle map induced on Haar-sampled group nodes: f(x_i) = adj(x_i) beta mod 1.

    Tabulated values plus the provenance needed to regenerate them
    (beta, t0, grid size, seed); built by homogeneous.induced_angle_grid.
    """

    def __init__(self, values, beta, t0=None, seed=None):
        super().__init__(values)
        self.beta = np.asarray(beta, dtype=float)
        self.t0 = t0
        self.seed = seed

    def descriptor(self):
        return {"family": "homogeneous_induced",
                "params": {"values": self.values.tolist(),
                           "beta": self.beta.tolist(), "t0": self.t0,
                           "Q": self.values.shape[0], "seed": self.seed},
                "d": self.d}


class ScaledMap(AngleMap):
    """k * f mod 1 for integer k."""

    def __init__(self, k: int, inner: AngleMap):
        self.k = int(k)
        self.inner = inner
        self.d = inner.d

    def values_on(self, grid):
        return np.mod(self.k * self.inner.values_on(grid), 1.0)

    def value_at(self, x):
        return np.mod(self.k * self.inner.value_at(x), 1.0)

    def descriptor(self):
        return {"family": "scaled",
                "params": {"k": self.k, "inner": self.inner.descriptor()},
                "d": self.d}


class SumMap(AngleMap):
    """(f + g) mod 1 pointwise."""

    def __init__(self, f: AngleMap, g: AngleMap):
        if f.d != g.d:
            raise ValueError("summands must share the fiber dimension")
        self.f = f
        self.g = g
        self.d = f.d

    def values_on(self, grid):
        return np.mod(self.f.values_on(grid) + self.g.values_on(grid), 1.0)

    def value_at(self, x):
        return np.mod(self.f.value_at(x) + self.g.value_at(x), 1.0)

    def descriptor(self):
        return {"family": "sum",
                "params": {"f": self.f.descriptor(), "g": self.g.descriptor()},
                "d": self.d}


def scale(k: int, f: AngleMap) -> AngleMap:
    """Integer multiple k*f mod 1, collapsing where a closed form exists."""
    k = int(k)
    if k == 0:
        return Linear(np.zeros(f.d))
    if k == 1:
        return f
    if isinstance(f, Linear):
        return Linear(k * f.alpha, np.mod(k * f.c, 1.0))
    if isinstance(f, ScaledMap):
        return scale(k * f.k, f.inner)
    return ScaledMap(k, f)


def map_sum(f: AngleMap, g: AngleMap) -> AngleMap:
    return SumMap(f, g)


def pushforward_samples(f: AngleMap, grid: FiberGrid, m):
    """Discretized pushforward of <m, f>: values <m, f(x_i)> mod 1, weights."""
    m = np.atleast_1d(np.asarray(m, dtype=int))
    if m.shape != (f.d,) or not np.any(m):
        raise ValueError("fiber character must be a nonzero integer vector "
                         f"of length {f.d}")
    vals = np.mod(f.values_on(grid) @ m.astype(float), 1.0)
    return vals, grid.weights


_FAMILIES = {}


def _register(name):
    def deco(builder):
        _FAMILIES[name] = builder
        return builder
    return deco


_register("linear")(lambda p: Linear(p["alpha"], p.get("c")))
_register("smooth_circle")(lambda p: SmoothCircle(p["eps"]))
_register("cantor_inverse_devil")(lambda p: CantorInverseDevil(p["depth"]))
_register("piecewise_constant")(
    lambda p: PiecewiseConstant(p["breakpoints"], p["values"]))
_register("tabulated")(lambda p: Tabulated(p["values"]))
_register("homogeneous_induced")(
    lambda p: HomogeneousInduced(p["values"], p["beta"],
                                 p.get("t0"), p.get("seed")))
_register("scaled")(lambda p: ScaledMap(p["k"], map_from_descriptor(p["inner"])))
_register("sum")(lambda p: SumMap(map_from_descriptor(p["f"]),
                                  map_from_descriptor(p["g"])))


def map_from_descriptor(desc: dict) -> AngleMap:
    """Inverse of AngleMap.descriptor()."""
    try:
        builder = _FAMILIES[desc["family"]]
    except KeyError:
        raise ValueError(f"unknown angle-map family {desc.get('family')!r}")
    f = builder(desc.get("params", {}))
    if "d" in desc and desc["d"] != f.d:
        raise ValueError("descriptor dimension disagrees with parameters")
    return f
