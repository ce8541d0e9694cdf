"""Fibered measures on [0,1] x T^d and the dynamics they carry.

The package has four computational layers:

* :mod:`fibrot.fibered_measure` -- measures with Lebesgue base marginal,
  stored as truncated per-fiber Fourier-Stieltjes coefficient tables.
  Fiberwise convolution is pointwise multiplication of tables, which makes
  the commutative monoid laws exact up to rounding.
* :mod:`fibrot.angle_maps` -- a registry of angle maps f: [0,1] -> T^d
  (linear, smooth circle perturbation, inverse devil's staircase,
  piecewise constant, tabulated) with integer scaling and sums.
* :mod:`fibrot.dynamics_lab` -- the experiments: orbit distances
  D_{nf} -> Haar, the Weyl second-moment statistic, sliding-window atom
  detection, natural-density estimates, C^2 coefficient decay, and the
  ternary self-similarity sequence.
* :mod:`fibrot.homogeneous` -- a concrete SL(2,R) x R^2 skew product over
  the modular surface: Haar sampling of the fundamental domain, Gauss
  reduction, the induced angle map, Birkhoff and correlation estimators.

``fibrot.cli`` exposes every experiment as ``fibrot <experiment> ...``.
"""

from .fibered_measure import (
    FiberGrid,
    FiberedMeasure,
    midpoint_grid,
    make_haar,
    make_graph,
    convolve,
    monoid_power,
    joint_coeff,
    joint_table,
    distance,
    save_measure_csv,
    load_measure_csv,
)
from .angle_maps import (
    AngleMap,
    Linear,
    SmoothCircle,
    CantorInverseDevil,
    PiecewiseConstant,
    Tabulated,
    HomogeneousInduced,
    scale,
    map_sum,
    pushforward_samples,
    map_from_descriptor,
)
from .dynamics_lab import (
    OrbitReport,
    WeylReport,
    AtomReport,
    DensityReport,
    CantorReport,
    DecayReport,
    orbit_distances,
    weyl_statistic,
    weyl_double_integral_mc,
    atom_spectrum,
    density_one_estimate,
    cantor_obstruction,
    decay_rate,
)
from .homogeneous import (
    ModelConfig,
    SkewState,
    tau,
    haar_sample,
    reduce_to_domain,
    angle_map_value,
    vertical_step,
    skew_step,
    birkhoff_average,
    birkhoff_ensemble,
    correlation,
    induced_angle_grid,
    lifted_vbar,
    random_state,
    trajectory,
)

__version__ = "0.1.0"
