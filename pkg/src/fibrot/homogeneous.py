"""A concrete skew product over the modular surface.

The group is SL(2,R) x R^2 with multiplication (g,v)(h,w) = (gh, v + g w),
the lattice is SL(2,Z) x Z^2, and the quotient fibers over the modular
surface with torus fiber T^2.  A point is stored as a SkewState (x, vbar)
with x a fundamental-domain representative and vbar in [0,1)^2; it stands
for the coset of (x, x vbar).

Base-point coordinate.  Reading the columns of g as complex numbers
omega1 = g00 + i g10, omega2 = g01 + i g11, the coordinate

    tau(g) = omega2 / omega1

lies in the upper half-plane (Im tau = det g / |omega1|^2 > 0), is fixed by
left rotations k(theta), and transforms under *right* multiplication by the
lattice generators as tau + 1 (for T = [[1,1],[0,1]]) and -1/tau (for
S = [[0,-1],[1,0]]).  Right-coset reduction x = g gamma therefore walks
tau(g) into the classical fundamental domain |Re tau| <= 1/2, |tau| >= 1
by integer translations and inversions (Gauss reduction).

Sampling.  With s = sqrt(v), the element k(theta) a(1/v) n(u) =
[[cos t/s, (u cos t - v sin t)/s], [sin t/s, (u sin t + v cos t)/s]]
has tau = u + iv exactly, and drawing (u, v) from the hyperbolic area
measure du dv / v^2 restricted to the fundamental domain (normalizer
Z = pi/3) with theta uniform produces Haar-distributed representatives:
the inverse map sends this parametrization to the standard n a k
decomposition, and inversion preserves Haar.  The u-marginal after
integrating out v is proportional to 1 / v_min(u) with
v_min = sqrt(1 - u^2), handled by rejection from the uniform proposal.

Fiber update.  One step of (a, alpha) on a state (x, vbar): reduce
a x = x' gamma^{-1}; the conjugated linear part collapses to the integer
matrix adj(gamma), giving

    vbar' = f_alpha(x') + adj(gamma) vbar  (mod Z^2),

where f_beta(x) = adj(x) beta mod Z^2 is the induced angle map.  Keeping
the linear part integral makes the torus arithmetic exact mod 1 and immune
to cusp excursions of the lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fibered_measure import FiberGrid
from .angle_maps import HomogeneousInduced

__all__ = [
    "ModelConfig",
    "SkewState",
    "tau",
    "haar_sample",
    "reduce_to_domain",
    "angle_map_value",
    "vertical_step",
    "skew_step",
    "birkhoff_average",
    "birkhoff_ensemble",
    "correlation",
    "induced_angle_grid",
    "lifted_vbar",
    "random_state",
    "trajectory",
]

_TWO_PI_I = 2j * np.pi
_FLIP_SLACK = 1e-15      # hysteresis for |tau| = 1 inversions
_BOUNDARY = 1e-12        # boundary-preference slack
_MAX_REDUCE = 1000
_MAX_REJECT = 10 ** 6


@dataclass(frozen=True)
class ModelConfig:
    """Skew-product parameters: a = diag(e^{t0}, e^{-t0}), translation
    alpha, distinguished eigen-direction beta (one coordinate must vanish
    so that a beta = e^{+-t0} beta holds exactly)."""

    t0: float = 0.5
    alpha: tuple = (0.3, 0.7)
    beta: tuple = (1.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        b = np.asarray(self.beta, dtype=float)
        if b.shape != (2,) or (b[0] != 0.0 and b[1] != 0.0):
            raise ValueError("beta must be an eigen-direction: one "
                             "coordinate exactly zero")
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in b))

    def a_matrix(self) -> np.ndarray:
        return np.diag([np.exp(self.t0), np.exp(-self.t0)])


@dataclass(frozen=True)
class SkewState:
    x: np.ndarray       # (2,2) fundamental-domain representative
    vbar: np.ndarray    # (2,) in [0,1)

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "vbar",
                           np.mod(np.asarray(self.vbar, dtype=float), 1.0))


def tau(g) -> complex:
    """Column-ratio coordinate in the upper half-plane."""
    g = np.asarray(g)
    return complex((g[0, 1] + 1j * g[1, 1]) / (g[0, 0] + 1j * g[1, 0]))


def _tau_batch(gs: np.ndarray) -> np.ndarray:
    return (gs[:, 0, 1] + 1j * gs[:, 1, 1]) / (gs[:, 0, 0] + 1j * gs[:, 1, 0])


def _renorm(g: np.ndarray) -> np.ndarray:
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if np.any(det <= 0):
        raise ValueError("matrix has non-positive determinant")
    return g / np.sqrt(det)[..., None, None]


def _adj_int(gamma: np.ndarray) -> np.ndarray:
    """Exact inverse of a unimodular integer matrix (adjugate)."""
    a, b, c, d = gamma[..., 0, 0], gamma[..., 0, 1], gamma[..., 1, 0], gamma[..., 1, 1]
    out = np.empty_like(gamma)
    out[..., 0, 0] = d
    out[..., 0, 1] = -b
    out[..., 1, 0] = -c
    out[..., 1, 1] = a
    return out


# ---------------------------------------------------------------------------
# Gauss reduction

def _reduce_batch(gs: np.ndarray):
    """Vectorized reduction: returns (xs, gammas) with xs = gs @ gammas,
    tau(xs) in the fundamental domain, gammas exact integer unimodular."""
    xs = _renorm(np.array(gs, dtype=float))
    B = xs.shape[0]
    gam = np.broadcast_to(np.eye(2, dtype=np.int64), (B, 2, 2)).copy()
    t = _tau_batch(xs)
    active = np.ones(B, dtype=bool)
    for _ in range(_MAX_REDUCE):
        n = np.where(active, np.floor(t.real + 0.5), 0.0)
        shift = n != 0.0
        if np.any(shift):
            ni = n[shift]
            xs[shift, :, 1] -= ni[:, None] * xs[shift, :, 0]
            gam[shift, :, 1] -= ni.astype(np.int64)[:, None] * gam[shift, :, 0]
            t[shift] -= ni
        flip = active & (t.real ** 2 + t.imag ** 2 < 1.0 - _FLIP_SLACK)
        if np.any(flip):
            c0 = xs[flip, :, 0].copy()
            xs[flip, :, 0] = xs[flip, :, 1]
            xs[flip, :, 1] = -c0
            c0 = gam[flip, :, 0].copy()
            gam[flip, :, 0] = gam[flip, :, 1]
            gam[flip, :, 1] = -c0
            t[flip] = -1.0 / t[flip]
        active = shift | flip
        if not np.any(active):
            break
    else:
        raise RuntimeError("Gauss reduction did not terminate (degenerate input)")

    # boundary conventions: prefer u >= 0 on |u| = 1/2 and on |tau| = 1
    left = t.real <= -0.5 + _BOUNDARY
    if np.any(left):
        xs[left, :, 1] += xs[left, :, 0]
        gam[left, :, 1] += gam[left, :, 0]
        t[left] += 1.0
    mod2 = t.real ** 2 + t.imag ** 2
    circ = (np.abs(mod2 - 1.0) <= 2 * _BOUNDARY) & (t.real < -_BOUNDARY)
    if np.any(circ):
        c0 = xs[circ, :, 0].copy()
        xs[circ, :, 0] = xs[circ, :, 1]
        xs[circ, :, 1] = -c0
        c0 = gam[circ, :, 0].copy()
        gam[circ, :, 0] = gam[circ, :, 1]
        gam[circ, :, 1] = -c0
    # sign convention: -I is a lattice element; pin the representative by
    # making the first nonzero entry of the first column positive.
    neg = (xs[:, 0, 0] < 0) | ((xs[:, 0, 0] == 0) & (xs[:, 1, 0] < 0))
    xs[neg] *= -1.0
    gam[neg] *= -1
    return xs, gam


def reduce_to_domain(g):
    """Reduce one group element: (x, gamma) with x = g gamma reduced."""
    xs, gam = _reduce_batch(np.asarray(g, dtype=float)[None])
    return xs[0], gam[0]


# ---------------------------------------------------------------------------
# Haar sampling

def haar_sample(rng: np.random.Generator, size: Optional[int] = None):
    """Haar-distributed fundamental-domain representatives.

    Draw u by rejection against the marginal 1/sqrt(1-u^2) on [-1/2,1/2],
    v by inverse CDF of dv/v^2 on [v_min(u), inf), theta uniform; assemble
    k(theta) a(1/v) n(u).  Every sample already satisfies |u| <= 1/2 and
    u^2 + v^2 >= 1.
    """
    want = 1 if size is None else int(size)
    if want < 1:
        raise ValueError("size must be >= 1")
    us = np.empty(0)
    drawn = 0
    while us.shape[0] < want:
        chunk = max(1024, want - us.shape[0])
        drawn += chunk
        if drawn > _MAX_REJECT + want:
            raise RuntimeError("rejection sampler exceeded its draw budget")
        u = rng.uniform(-0.5, 0.5, size=chunk)
        keep = rng.random(chunk) < (np.sqrt(3.0) / 2.0) / np.sqrt(1.0 - u * u)
        us = np.concatenate([us, u[keep]])
    u = us[:want]
    vmin = np.sqrt(1.0 - u * u)
    v = vmin / (1.0 - rng.random(want))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=want)
    s = np.sqrt(v)
    ct, st = np.cos(theta), np.sin(theta)
    out = np.empty((want, 2, 2))
    out[:, 0, 0] = ct / s
    out[:, 0, 1] = (u * ct - v * st) / s
    out[:, 1, 0] = st / s
    out[:, 1, 1] = (u * st + v * ct) / s
    return out[0] if size is None else out


def random_state(rng: np.random.Generator, size: Optional[int] = None):
    """Haar base point with uniform fiber coordinate."""
    if size is None:
        return SkewState(x=haar_sample(rng), vbar=rng.random(2))
    return haar_sample(rng, size), rng.random((size, 2))


# ---------------------------------------------------------------------------
# Angle map and dynamics

def angle_map_value(x, beta) -> np.ndarray:
    """f_beta(x) = adj(x) beta mod 1 (the inverse acts since det x = 1)."""
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    out = np.empty(2)
    out[0] = x[1, 1] * beta[0] - x[0, 1] * beta[1]
    out[1] = -x[1, 0] * beta[0] + x[0, 0] * beta[1]
    return np.mod(out, 1.0)


def _angle_map_batch(xs: np.ndarray, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    f = np.empty((xs.shape[0], 2))
    f[:, 0] = xs[:, 1, 1] * beta[0] - xs[:, 0, 1] * beta[1]
    f[:, 1] = -xs[:, 1, 0] * beta[0] + xs[:, 0, 0] * beta[1]
    return np.mod(f, 1.0)


def vertical_step(s: SkewState, beta) -> SkewState:
    """Action of (e, beta): rotate the fiber by f_beta(x)."""
    return SkewState(x=s.x, vbar=np.mod(s.vbar + angle_map_value(s.x, beta), 1.0))


def _skew_step_batch(xs, vbars, a, alpha):
    gs = a @ xs            # broadcast (2,2) @ (B,2,2)
    xs2, gam = _reduce_batch(gs)
    lin = np.einsum("bij,bj->bi", _adj_int(gam).astype(float), vbars)
    vb2 = np.mod(_angle_map_batch(xs2, alpha) + lin, 1.0)
    return xs2, vb2


def skew_step(s: SkewState, cfg: ModelConfig) -> SkewState:
    """One step of (a, alpha) through the quotient."""
    g = cfg.a_matrix() @ s.x
    x2, gam = reduce_to_domain(g)
    lin = _adj_int(gam).astype(float) @ s.vbar
    vb = np.mod(angle_map_value(x2, cfg.alpha) + lin, 1.0)
    return SkewState(x=x2, vbar=vb)


def birkhoff_average(s0: SkewState, cfg: ModelConfig, T: int, m) -> complex:
    """(1/T) sum_{k<T} e^{2 pi i <m, vbar_k>} along the skew orbit."""
    m = np.asarray(m, dtype=float)
    if T < 1:
        raise ValueError("need T >= 1")
    a = cfg.a_matrix()
    xs = s0.x[None].copy()
    vb = s0.vbar[None].copy()
    acc = 0.0 + 0.0j
    for _ in range(T):
        acc += np.exp(_TWO_PI_I * float(vb[0] @ m))
        xs, vb = _skew_step_batch(xs, vb, a, cfg.alpha)
    return acc / T


def birkhoff_ensemble(cfg: ModelConfig, T: int, m, n_orbits: int,
                      seed: Optional[int] = None) -> np.ndarray:
    """Birkhoff averages of e^{2 pi i <m, vbar>} over Haar-seeded starts,
    advanced in lockstep as one batch."""
    m = np.asarray(m, dtype=float)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    xs, vb = random_state(rng, n_orbits)
    a = cfg.a_matrix()
    acc = np.zeros(n_orbits, dtype=complex)
    for _ in range(T):
        acc += np.exp(_TWO_PI_I * (vb @ m))
        xs, vb = _skew_step_batch(xs, vb, a, cfg.alpha)
    return acc / T


def correlation(cfg: ModelConfig, m1, m2, k: int, M: int,
                seed: Optional[int] = None) -> complex:
    """Monte Carlo mixing correlation at lag k.

    Samples M points (Haar base, uniform fiber), evaluates
    e^{-2 pi i <m2, vbar>} at time zero and e^{2 pi i <m1, vbar>} after k
    skew steps, and averages the product.  Mixing predicts a O(1/sqrt(M))
    value for (m1, m2) != 0.
    """
    if M < 1 or k < 0:
        raise ValueError("need M >= 1 and k >= 0")
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    xs, vb = random_state(rng, M)
    obs0 = np.exp(-_TWO_PI_I * (vb @ m2))
    a = cfg.a_matrix()
    for _ in range(k):
        xs, vb = _skew_step_batch(xs, vb, a, cfg.alpha)
    return complex(np.mean(np.exp(_TWO_PI_I * (vb @ m1)) * obs0))


def induced_angle_grid(cfg: ModelConfig, Q: int, samples: Optional[np.ndarray] = None):
    """Haar-sampled grid plus the tabulated induced angle map f_beta.

    The grid has no circle coordinate (the base is an abstract sample set),
    so only fiber characters act on it downstream.  `samples` overrides the
    sampler for deterministic test fixtures.
    """
    if Q < 1:
        raise ValueError("need Q >= 1")
    if samples is None:
        rng = np.random.default_rng(cfg.seed)
        samples = haar_sample(rng, Q)
    else:
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (Q, 2, 2):
            raise ValueError("samples must have shape (Q, 2, 2)")
    values = _angle_map_batch(samples, cfg.beta)
    grid = FiberGrid(weights=np.full(Q, 1.0 / Q), circle_coord=None)
    amap = HomogeneousInduced(values, beta=cfg.beta, t0=cfg.t0, seed=cfg.seed)
    return grid, amap


# ---------------------------------------------------------------------------
# Lifted-orbit oracle and trajectories

def lifted_vbar(s0: SkewState, cfg: ModelConfig, k: int) -> np.ndarray:
    """Fiber coordinate after k steps via one-shot reduction of the lift.

    Computes (a, alpha)^k = (a^k, sum_j a^j alpha) in extended precision,
    applies it to the lifted point (x0, x0 vbar0), reduces the base once,
    and re-extracts the fiber coordinate.  Serves as an independent oracle
    for the step-by-step cocycle.
    """
    ld = np.longdouble
    t0 = ld(cfg.t0)
    alpha = np.array(cfg.alpha, dtype=ld)
    x0 = s0.x.astype(ld)
    w = np.zeros(2, dtype=ld)
    for j in range(k):
        w += np.array([np.exp(j * t0), np.exp(-j * t0)], dtype=ld) * alpha
    ak = np.array([np.exp(k * t0), np.exp(-k * t0)], dtype=ld)
    lift = x0 @ s0.vbar.astype(ld)
    y = ak * lift + w
    M = ak[:, None] * x0            # a^k @ x0
    x2, _gam = reduce_to_domain(M.astype(float))
    x2 = x2.astype(ld)
    adj = np.array([[x2[1, 1], -x2[0, 1]], [-x2[1, 0], x2[0, 0]]], dtype=ld)
    return np.mod((adj @ y).astype(float), 1.0)


def trajectory(s0: SkewState, cfg: ModelConfig, T: int) -> np.ndarray:
    """Rows (step, u, v, theta, vbar1, vbar2) for steps 0..T."""
    rows = np.empty((T + 1, 6))
    s = s0
    for step in range(T + 1):
        t = tau(s.x)
        theta = np.arctan2(s.x[1, 0], s.x[0, 0])
        rows[step] = (step, t.real, t.imag, theta, s.vbar[0], s.vbar[1])
        if step < T:
            s = skew_step(s, cfg)
    return rows
